//! WGNL binary latent files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content                 |
//! |-------|-------------------------|
//! | 4     | magic `b"WGNL"`         |
//! | 4     | version, `u32` (= 1)    |
//! | 8     | length `N`, `u64`       |
//! | 8·N   | values, IEEE-754 `f64`  |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::LatentVector;

pub const MAGIC: [u8; 4] = *b"WGNL";
pub const VERSION: u32 = 1;

pub fn write_latent_to<W: Write>(mut w: W, x: &LatentVector) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(x.len() as u64).to_le_bytes())?;
    for v in x.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_latent_from<R: Read>(mut r: R) -> Result<LatentVector> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected \"WGNL\""
        )));
    }
    let mut word = [0u8; 4];
    read_exact(&mut r, &mut word, "version")?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut buf = [0u8; 8];
    read_exact(&mut r, &mut buf, "length")?;
    let n = u64::from_le_bytes(buf);
    let n = usize::try_from(n).map_err(|_| Error::Format(format!("length {n} too large")))?;

    let mut values = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        read_exact(&mut r, &mut buf, "values")?;
        values.push(f64::from_le_bytes(buf));
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format(format!("trailing bytes after {n} values")));
    }
    LatentVector::new(values)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => {
            Error::Format(format!("truncated while reading {what}"))
        }
        _ => Error::Io(e),
    })
}

pub fn write_latent<P: AsRef<Path>>(path: P, x: &LatentVector) -> Result<()> {
    write_latent_to(BufWriter::new(File::create(path)?), x)
}

pub fn read_latent<P: AsRef<Path>>(path: P) -> Result<LatentVector> {
    read_latent_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn encode(x: &LatentVector) -> Vec<u8> {
        let mut out = Vec::new();
        write_latent_to(&mut out, x).unwrap();
        out
    }

    #[test]
    fn header_layout() {
        let x = LatentVector::new(vec![1.0, -2.5]).unwrap();
        let bytes = encode(&x);
        assert_eq!(&bytes[..4], b"WGNL");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..16], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&bytes[16..24], &1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 16);
    }

    #[test]
    fn malformed_inputs() {
        let good = encode(&LatentVector::new(vec![0.5; 4]).unwrap());
        let cases: Vec<Vec<u8>> = vec![
            b"WGNX".iter().chain(&good[4..]).copied().collect(),
            {
                let mut v = good.clone();
                v[4] = 2;
                v
            },
            good[..good.len() - 3].to_vec(),
            good[..10].to_vec(),
            [good.as_slice(), &[0u8]].concat(),
        ];
        for bytes in cases {
            assert!(matches!(
                read_latent_from(bytes.as_slice()),
                Err(Error::Format(_))
            ));
        }
        // Odd length parses but is not a valid latent.
        let mut odd = Vec::new();
        odd.extend_from_slice(b"WGNL");
        odd.extend_from_slice(&1u32.to_le_bytes());
        odd.extend_from_slice(&3u64.to_le_bytes());
        for v in [1.0f64, 2.0, 3.0] {
            odd.extend_from_slice(&v.to_le_bytes());
        }
        assert!(matches!(
            read_latent_from(odd.as_slice()),
            Err(Error::Dimension(_))
        ));
    }

    proptest! {
        #[test]
        fn roundtrip(values in prop::collection::vec(-1e6f64..1e6, 1..64)) {
            let mut values = values;
            if values.len() % 2 == 1 {
                values.push(0.0);
            }
            let x = LatentVector::new(values).unwrap();
            let back = read_latent_from(encode(&x).as_slice()).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
