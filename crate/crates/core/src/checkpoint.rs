//! Binary factor checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "SRFACT01"
//! p          u64      users
//! q          u64      items
//! l          u64      latent dimension
//! scalar     u8       0 = binary, 1 = tag-count
//! seed       u64
//! corpus     32 bytes SHA-256 of the training corpus
//! S          l*p f64  row-major: all users' component 0, then component 1, ...
//! V          l*q f64  row-major
//! ```

use std::fs;
use std::path::Path;

use crate::corpus::ScalarMode;
use crate::error::{Error, Result};
use crate::factorizer::LatentFactors;

const MAGIC: &[u8; 8] = b"SRFACT01";
const HEADER_LEN: usize = 8 + 8 * 3 + 1 + 8 + 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub num_users: usize,
    pub num_items: usize,
    pub latent_dim: usize,
    pub scalar_mode: ScalarMode,
    pub seed: u64,
    pub corpus_checksum: [u8; 32],
}

pub fn encode(factors: &LatentFactors, scalar_mode: ScalarMode, seed: u64, corpus_checksum: [u8; 32]) -> Vec<u8> {
    let (p, q, l) = (factors.num_users(), factors.num_items(), factors.dim());
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * l * (p + q));
    out.extend_from_slice(MAGIC);
    for n in [p, q, l] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    out.push(scalar_mode.code());
    out.extend_from_slice(&seed.to_le_bytes());
    out.extend_from_slice(&corpus_checksum);
    for d in 0..l {
        for u in 0..p {
            out.extend_from_slice(&factors.user(u)[d].to_le_bytes());
        }
    }
    for d in 0..l {
        for i in 0..q {
            out.extend_from_slice(&factors.item(i)[d].to_le_bytes());
        }
    }
    out
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<(CheckpointHeader, LatentFactors)> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint("missing factor checkpoint header".into()));
    }
    let dims: Vec<usize> = (0..3).map(|k| read_u64(bytes, 8 + 8 * k) as usize).collect();
    let (p, q, l) = (dims[0], dims[1], dims[2]);
    let scalar_mode = ScalarMode::from_code(bytes[32])
        .ok_or_else(|| Error::Checkpoint(format!("unknown scalar mode {}", bytes[32])))?;
    let seed = read_u64(bytes, 33);
    let corpus_checksum: [u8; 32] = bytes[41..73].try_into().expect("32 bytes");
    let expected = l
        .checked_mul(p + q)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::Checkpoint(format!(
            "payload is {} bytes, header implies {expected:?}",
            bytes.len()
        )));
    }
    let value = |k: usize| f64::from_le_bytes(bytes[HEADER_LEN + 8 * k..HEADER_LEN + 8 * k + 8].try_into().unwrap());
    let mut users = vec![0.0; p * l];
    let mut items = vec![0.0; q * l];
    for d in 0..l {
        for u in 0..p {
            users[u * l + d] = value(d * p + u);
        }
        for i in 0..q {
            items[i * l + d] = value(l * p + d * q + i);
        }
    }
    Ok((
        CheckpointHeader {
            num_users: p,
            num_items: q,
            latent_dim: l,
            scalar_mode,
            seed,
            corpus_checksum,
        },
        LatentFactors::from_raw(l, users, items),
    ))
}

pub fn write(path: &Path, factors: &LatentFactors, scalar_mode: ScalarMode, seed: u64, corpus_checksum: [u8; 32]) -> Result<()> {
    fs::write(path, encode(factors, scalar_mode, seed, corpus_checksum)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<(CheckpointHeader, LatentFactors)> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(p in 0usize..5, q in 0usize..5, l in 1usize..4, seed: u64, bits in proptest::collection::vec(any::<u64>(), 40)) {
            let users: Vec<f64> = (0..p * l).map(|k| f64::from_bits(bits[k % 40])).collect();
            let items: Vec<f64> = (0..q * l).map(|k| f64::from_bits(bits[(k + 7) % 40])).collect();
            let f = LatentFactors::from_raw(l, users, items);
            let bytes = encode(&f, ScalarMode::Binary, seed, [7; 32]);
            let (h, back) = decode(&bytes).unwrap();
            prop_assert_eq!(h.seed, seed);
            prop_assert_eq!(h.num_users, p);
            prop_assert_eq!(h.corpus_checksum, [7; 32]);
            let a: Vec<u64> = f.user_data().iter().chain(f.item_data()).map(|x| x.to_bits()).collect();
            let b: Vec<u64> = back.user_data().iter().chain(back.item_data()).map(|x| x.to_bits()).collect();
            prop_assert_eq!(a, b);
            prop_assert_eq!(encode(&back, h.scalar_mode, h.seed, h.corpus_checksum), bytes);
        }
    }

    #[test]
    fn rejects_truncated_payload() {
        let f = LatentFactors::zeros(2, 2, 2);
        let mut bytes = encode(&f, ScalarMode::TagCount, 1, [0; 32]);
        bytes.pop();
        assert!(matches!(decode(&bytes), Err(Error::Checkpoint(_))));
        assert!(matches!(decode(b"nope"), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn layout_is_row_major() {
        let f = LatentFactors::from_vectors(2, vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![vec![5.0, 6.0]]).unwrap();
        let bytes = encode(&f, ScalarMode::TagCount, 0, [0; 32]);
        let at = |k: usize| f64::from_le_bytes(bytes[HEADER_LEN + 8 * k..HEADER_LEN + 8 * k + 8].try_into().unwrap());
        assert_eq!((0..6).map(at).collect::<Vec<_>>(), vec![1.0, 3.0, 2.0, 4.0, 5.0, 6.0]);
    }
}
