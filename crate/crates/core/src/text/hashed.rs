use super::{content_tokens, l2_normalize_rows, DocumentMatrix, PreprocessedDoc, Representation, RowNorm, TextError};
use ndarray::Array2;

/// Default width of hashed document vectors.
pub const DEFAULT_HASHED_DIMS: usize = 384;

const HASH_SEED: u64 = 0x9e37_79b9_7f4a_7c15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the little-endian seed bytes followed by `bytes`.
pub fn fnv1a_seeded(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for b in seed.to_le_bytes().iter().chain(bytes) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    // final avalanche so low bits depend on every input byte
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h
}

fn add_feature(row: &mut [f64], feature: &str) {
    let h = fnv1a_seeded(HASH_SEED, feature.as_bytes());
    let col = (h % row.len() as u64) as usize;
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    row[col] += sign;
}

/// Signed feature hashing of content unigrams and bigrams, L2-normalized.
pub fn embed_hashed(docs: &[PreprocessedDoc], dims: usize) -> Result<DocumentMatrix, TextError> {
    if dims < 8 {
        return Err(TextError::InvalidParams(format!("hashed dims must be >= 8, got {dims}")));
    }
    let mut values = Array2::<f64>::zeros((docs.len(), dims));
    for (i, doc) in docs.iter().enumerate() {
        let toks = content_tokens(doc);
        let row = values.row_mut(i).into_slice().expect("standard layout");
        for t in &toks {
            add_feature(row, t);
        }
        for w in toks.windows(2) {
            add_feature(row, &format!("{} {}", w[0], w[1]));
        }
    }
    l2_normalize_rows(&mut values);
    Ok(DocumentMatrix::new(values, Representation::Hashed, RowNorm::L2))
}
