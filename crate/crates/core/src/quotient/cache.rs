//! `TFQ1` container for enumerated quotients.
//!
//! Layout, integers little-endian: magic `TFQ1`, degree (u8), level (u32),
//! element count (u64), body width (u32), witness flag (u8), source name
//! (u32 length + UTF-8), sorted bodies, parent table (u32 each, `u32::MAX`
//! for the identity), generator table (u16 each).

use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use super::{LevelQuotient, NO_PARENT};
use crate::error::{Error, Result};
use crate::perm::Degree;

pub const CACHE_MAGIC: &[u8; 4] = b"TFQ1";

/// Cache key: hex SHA-256 of the canonical presentation text and the level.
pub fn cache_key(canonical_text: &str, level: usize) -> String {
    let mut h = Sha256::new();
    h.update(canonical_text.as_bytes());
    h.update(b"\nlevel ");
    h.update(level.to_string().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Cache(msg.into())
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| bad(format!("truncated file: {e}")))?;
    Ok(buf)
}

impl LevelQuotient {
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&[self.degree.get() as u8])?;
        w.write_all(&(self.level as u32).to_le_bytes())?;
        w.write_all(&(self.order() as u64).to_le_bytes())?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&[self.has_words as u8])?;
        w.write_all(&(self.source.len() as u32).to_le_bytes())?;
        w.write_all(self.source.as_bytes())?;
        w.write_all(&self.bodies)?;
        let mut buf = Vec::with_capacity(self.order() * 6);
        for &p in &self.parents {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        for &g in &self.gens {
            buf.extend_from_slice(&g.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<LevelQuotient> {
        if &read_exact::<4>(r)? != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let degree = Degree::new(read_exact::<1>(r)?[0] as usize).map_err(|e| bad(e.to_string()))?;
        let level = u32::from_le_bytes(read_exact(r)?) as usize;
        let count = u64::from_le_bytes(read_exact(r)?) as usize;
        let width = u32::from_le_bytes(read_exact(r)?) as usize;
        if level > 32 || width != degree.internal_vertices(level) * degree.label_width() || count == 0 {
            return Err(bad("inconsistent header"));
        }
        let has_words = match read_exact::<1>(r)?[0] {
            0 => false,
            1 => true,
            f => return Err(bad(format!("bad witness flag {f}"))),
        };
        let name_len = u32::from_le_bytes(read_exact(r)?) as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name).map_err(|e| bad(e.to_string()))?;
        let source = String::from_utf8(name).map_err(|e| bad(e.to_string()))?;

        let mut bodies = vec![0u8; count * width];
        r.read_exact(&mut bodies).map_err(|e| bad(e.to_string()))?;
        let mut tables = vec![0u8; count * 6];
        r.read_exact(&mut tables).map_err(|e| bad(e.to_string()))?;
        let (pbytes, gbytes) = tables.split_at(count * 4);
        let parents: Vec<u32> = pbytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let gens: Vec<u16> = gbytes
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();

        let q = LevelQuotient {
            degree,
            level,
            width,
            bodies,
            parents,
            gens,
            has_words,
            source,
        };
        if width > 0 && !(1..count).all(|i| q.body(i - 1) < q.body(i)) {
            return Err(bad("bodies are not strictly sorted"));
        }
        if q.parents.iter().filter(|&&p| p == NO_PARENT).count() != 1
            || q.parents.iter().any(|&p| p != NO_PARENT && p as usize >= count)
        {
            return Err(bad("bad parent table"));
        }
        for i in 0..count {
            crate::portrait::Portrait::from_body(degree, level, q.body(i)).map_err(|e| bad(e.to_string()))?;
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GroupPresentation;
    use crate::group::Group;
    use crate::quotient::enumerate_quotient;

    #[test]
    fn round_trip() {
        let text = "degree 2\ngen a = (1, b) ()\ngen b = (1, a) (1 2)\n";
        let g = Group::from_presentation(GroupPresentation::parse(text).unwrap());
        let q = enumerate_quotient(&g, 4, 10_000).unwrap();
        let mut buf = Vec::new();
        q.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"TFQ1");
        let back = LevelQuotient::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, q);
        buf.truncate(buf.len() - 1);
        assert!(matches!(
            LevelQuotient::read_from(&mut buf.as_slice()),
            Err(Error::Cache(_))
        ));
    }

    #[test]
    fn keys_depend_on_text_and_level() {
        assert_ne!(cache_key("x", 1), cache_key("x", 2));
        assert_ne!(cache_key("x", 1), cache_key("y", 1));
        assert_eq!(cache_key("x", 1).len(), 64);
    }
}
