//! Atom feed decoding for `/api/query` responses.

use super::{ArxivError, PaperRecord};
use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

/// Records decoded from one feed page.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomFeed {
    pub papers: Vec<PaperRecord>,
    /// Entries dropped for a missing abstract, title, id or timestamp.
    pub skipped: usize,
    /// `opensearch:totalResults`, when the feed carries it.
    pub total_results: Option<usize>,
}

#[derive(Default)]
struct EntryBuilder {
    id: String,
    title: String,
    summary: String,
    authors: Vec<String>,
    categories: Vec<String>,
    published: String,
    updated: String,
    link: Option<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    None,
    Id,
    Title,
    Summary,
    AuthorName,
    Published,
    Updated,
    TotalResults,
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn parse_err(reader: &Reader<&[u8]>, message: impl Into<String>) -> ArxivError {
    ArxivError::Parse {
        offset: reader.buffer_position(),
        message: message.into(),
    }
}

/// Splits `http://arxiv.org/abs/2401.01234v2` into `("2401.01234", 2)`.
/// Old-style ids (`hep-th/9901001v1`) keep their archive prefix.
pub(crate) fn split_versioned_id(raw: &str) -> Option<(String, u32)> {
    let raw = raw.trim();
    let tail = raw.split_once("/abs/").map(|(_, t)| t).unwrap_or(raw);
    let tail = tail.trim_end_matches('/');
    if let Some(pos) = tail.rfind('v') {
        let (base, ver) = tail.split_at(pos);
        if let Ok(v) = ver[1..].parse::<u32>() {
            if !base.is_empty() && v >= 1 {
                return Some((base.to_string(), v));
            }
        }
    }
    if tail.is_empty() {
        None
    } else {
        Some((tail.to_string(), 1))
    }
}

fn attr(e: &BytesStart<'_>, name: &[u8]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.local_name().as_ref() == name)
        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()))
}

fn finish(entry: EntryBuilder, feed: &mut AtomFeed) -> Result<(), ArxivError> {
    if entry.id.contains("/api/errors") {
        return Err(ArxivError::Api(collapse_ws(&entry.summary)));
    }
    let title = collapse_ws(&entry.title);
    let summary = collapse_ws(&entry.summary);
    let parsed = (|| {
        let (arxiv_id, version) = split_versioned_id(&entry.id)?;
        let published: DateTime<Utc> = entry.published.trim().parse().ok()?;
        let updated: DateTime<Utc> = if entry.updated.trim().is_empty() {
            published
        } else {
            entry.updated.trim().parse().ok()?
        };
        Some((arxiv_id, version, published, updated.max(published)))
    })();
    match parsed {
        Some((arxiv_id, version, published, updated)) if !title.is_empty() && !summary.is_empty() => {
            let url = entry
                .link
                .unwrap_or_else(|| format!("https://arxiv.org/abs/{arxiv_id}v{version}"));
            feed.papers.push(PaperRecord {
                arxiv_id,
                version,
                title,
                abstract_text: summary,
                authors: entry.authors,
                categories: entry.categories,
                published,
                updated,
                url,
            });
        }
        _ => feed.skipped += 1,
    }
    Ok(())
}

/// Decodes an arXiv Atom feed. Entries without an abstract (or other
/// required fields) are skipped and counted in [`AtomFeed::skipped`].
pub fn parse_atom(bytes: &[u8]) -> Result<AtomFeed, ArxivError> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().check_end_names = true;

    let mut feed = AtomFeed::default();
    let mut buf = Vec::new();
    let mut depth = 0usize;
    let mut saw_feed = false;
    let mut entry: Option<EntryBuilder> = None;
    let mut in_author = false;
    let mut field = Field::None;

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| parse_err(&reader, e.to_string()))?;
        match event {
            Event::Start(e) => {
                depth += 1;
                let name = e.local_name();
                let name = name.as_ref();
                if depth == 1 {
                    if name != b"feed" {
                        return Err(parse_err(&reader, "root element is not <feed>"));
                    }
                    saw_feed = true;
                }
                field = match (entry.is_some(), name) {
                    (false, b"entry") => {
                        entry = Some(EntryBuilder::default());
                        Field::None
                    }
                    (false, b"totalResults") => Field::TotalResults,
                    (true, b"author") => {
                        in_author = true;
                        Field::None
                    }
                    (true, b"name") if in_author => Field::AuthorName,
                    (true, b"id") => Field::Id,
                    (true, b"title") => Field::Title,
                    (true, b"summary") => Field::Summary,
                    (true, b"published") => Field::Published,
                    (true, b"updated") => Field::Updated,
                    (true, _) => {
                        handle_empty_like(&e, entry.as_mut().unwrap());
                        Field::None
                    }
                    _ => Field::None,
                };
                if field == Field::AuthorName {
                    entry.as_mut().unwrap().authors.push(String::new());
                }
            }
            Event::Empty(e) => {
                if depth == 0 {
                    return Err(parse_err(&reader, "empty document element"));
                }
                if let Some(entry) = entry.as_mut() {
                    handle_empty_like(&e, entry);
                }
            }
            Event::End(e) => {
                depth = depth.saturating_sub(1);
                match e.local_name().as_ref() {
                    b"entry" => {
                        if let Some(done) = entry.take() {
                            finish(done, &mut feed)?;
                        }
                    }
                    b"author" => in_author = false,
                    _ => {}
                }
                field = Field::None;
            }
            Event::Text(t) => {
                let text = t.xml_content().map_err(|e| parse_err(&reader, e.to_string()))?;
                push_text(&mut feed, entry.as_mut(), field, &text, &reader)?;
            }
            Event::CData(t) => {
                let text = t.decode().map_err(|e| parse_err(&reader, e.to_string()))?;
                push_text(&mut feed, entry.as_mut(), field, &text, &reader)?;
            }
            Event::GeneralRef(r) => {
                let resolved = if let Some(ch) = r.resolve_char_ref().map_err(|e| parse_err(&reader, e.to_string()))? {
                    ch.to_string()
                } else {
                    let name = r.decode().map_err(|e| parse_err(&reader, e.to_string()))?;
                    match name.as_ref() {
                        "amp" => "&".into(),
                        "lt" => "<".into(),
                        "gt" => ">".into(),
                        "quot" => "\"".into(),
                        "apos" => "'".into(),
                        other => return Err(parse_err(&reader, format!("unknown entity &{other};"))),
                    }
                };
                push_text(&mut feed, entry.as_mut(), field, &resolved, &reader)?;
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if depth != 0 || entry.is_some() {
        return Err(parse_err(&reader, "unexpected end of document"));
    }
    if !saw_feed {
        return Err(parse_err(&reader, "no <feed> element"));
    }
    Ok(feed)
}

fn handle_empty_like(e: &BytesStart<'_>, entry: &mut EntryBuilder) {
    match e.local_name().as_ref() {
        b"category" => {
            if let Some(term) = attr(e, b"term") {
                if !entry.categories.contains(&term) {
                    entry.categories.push(term);
                }
            }
        }
        b"link" => {
            let rel = attr(e, b"rel");
            let is_abs = rel.as_deref() == Some("alternate") || (rel.is_none() && attr(e, b"title").is_none());
            if is_abs && entry.link.is_none() {
                entry.link = attr(e, b"href");
            }
        }
        _ => {}
    }
}

fn push_text(
    feed: &mut AtomFeed,
    entry: Option<&mut EntryBuilder>,
    field: Field,
    text: &str,
    reader: &Reader<&[u8]>,
) -> Result<(), ArxivError> {
    let Some(entry) = entry else {
        if field == Field::TotalResults {
            let n = text
                .trim()
                .parse()
                .map_err(|_| parse_err(reader, format!("bad totalResults {text:?}")))?;
            feed.total_results = Some(n);
        }
        return Ok(());
    };
    match field {
        Field::Id => entry.id.push_str(text),
        Field::Title => entry.title.push_str(text),
        Field::Summary => entry.summary.push_str(text),
        Field::Published => entry.published.push_str(text),
        Field::Updated => entry.updated.push_str(text),
        Field::AuthorName => {
            if let Some(last) = entry.authors.last_mut() {
                last.push_str(text);
                *last = collapse_ws(last);
            }
        }
        Field::None | Field::TotalResults => {}
    }
    Ok(())
}
