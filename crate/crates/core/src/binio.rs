//! Little-endian framing shared by the checkpoint and dataset formats.
//!
//! Every file is `magic[4] | version u32 | total_len u64 | body | crc64 u64`
//! where the trailing CRC-64/XZ covers every byte before it.

use crc::{Crc, CRC_64_XZ};

use crate::error::{Error, Result};

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

pub(crate) const PREAMBLE_LEN: usize = 16;

pub(crate) fn checksum(bytes: &[u8]) -> u64 {
    CRC64.checksum(bytes)
}

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new(magic: [u8; 4], version: u32) -> Self {
        let mut w = Self::default();
        w.buf.extend_from_slice(&magic);
        w.u32(version);
        // total length, patched in finish()
        w.u64(0);
        w
    }

    pub fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn finish(mut self) -> Vec<u8> {
        let total = (self.buf.len() + 8) as u64;
        self.buf[8..16].copy_from_slice(&total.to_le_bytes());
        let crc = checksum(&self.buf);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        self.buf
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Validates magic, version, declared length and checksum, in that order,
    /// and returns a reader positioned at the start of the body.
    pub fn open(bytes: &'a [u8], magic: [u8; 4], version: u32) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::Truncated(format!("{} bytes, no magic", bytes.len())));
        }
        let found: [u8; 4] = bytes[..4].try_into().expect("len checked");
        if found != magic {
            return Err(Error::BadMagic {
                expected: magic,
                found,
            });
        }
        if bytes.len() < PREAMBLE_LEN + 8 {
            return Err(Error::Truncated(format!("{} bytes, header incomplete", bytes.len())));
        }
        let v = u32::from_le_bytes(bytes[4..8].try_into().expect("len checked"));
        if v != version {
            return Err(Error::VersionMismatch {
                expected: version,
                found: v,
            });
        }
        let declared = u64::from_le_bytes(bytes[8..16].try_into().expect("len checked"));
        let actual = bytes.len() as u64;
        if actual < declared {
            return Err(Error::Truncated(format!(
                "file has {actual} bytes, header declares {declared}"
            )));
        }
        if actual > declared {
            return Err(Error::Format(format!(
                "file has {actual} bytes, header declares {declared}"
            )));
        }
        let body_end = bytes.len() - 8;
        let stored = u64::from_le_bytes(bytes[body_end..].try_into().expect("len checked"));
        let computed = checksum(&bytes[..body_end]);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        Ok(Self {
            buf: &bytes[..body_end],
            pos: PREAMBLE_LEN,
        })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("read of {n} bytes past end of body")))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        self.take(n)
    }

    pub fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("size overflows usize".into()))
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn framing_round_trip_and_errors() {
        let mut w = Writer::new(*b"TEST", 3);
        w.u32(42);
        w.f64(1.5);
        let bytes = w.finish();
        let mut r = Reader::open(&bytes, *b"TEST", 3).unwrap();
        assert_eq!(r.u32().unwrap(), 42);
        assert_eq!(r.f64().unwrap(), 1.5);
        assert_eq!(r.remaining(), 0);

        assert!(matches!(Reader::open(&bytes, *b"NOPE", 3), Err(Error::BadMagic { .. })));
        assert!(matches!(
            Reader::open(&bytes, *b"TEST", 4),
            Err(Error::VersionMismatch { .. })
        ));
        assert!(matches!(
            Reader::open(&bytes[..bytes.len() - 1], *b"TEST", 3),
            Err(Error::Truncated(_))
        ));
        let mut bad = bytes.clone();
        bad[17] ^= 0x10;
        assert!(matches!(Reader::open(&bad, *b"TEST", 3), Err(Error::Checksum { .. })));
    }
}
