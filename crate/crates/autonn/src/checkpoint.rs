//! Binary parameter checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "NLNN" | version: u32 | record*
//! record = name_len: u32 | name: UTF-8 | rank: u32 | extents: u32[rank] | values: f64[∏extents]
//! ```
//!
//! Records run to end of file. Values round-trip bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::NnError;
use crate::params::ParamSet;
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"NLNN";
const VERSION: u32 = 1;
const MAX_NAME_LEN: u32 = 4096;
const MAX_RANK: u32 = 8;
const MAX_VALUES: u64 = 1 << 30;

pub fn save_params(path: &Path, params: &ParamSet) -> Result<(), NnError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for (name, tensor) in params.iter() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(tensor.shape().len() as u32).to_le_bytes())?;
        for &e in tensor.shape() {
            w.write_all(&(e as u32).to_le_bytes())?;
        }
        for &v in tensor.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_params(path: &Path, label: &str) -> Result<ParamSet, NnError> {
    let mut r = Counted {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NnError::Format {
            offset: 0,
            msg: format!("bad magic {magic:02x?}, expected \"NLNN\""),
        });
    }
    let version = r
        .read_u32()?
        .ok_or_else(|| r.format_err("file ends before version field"))?;
    if version != VERSION {
        return Err(NnError::Format {
            offset: 4,
            msg: format!("unsupported version {version}, expected {VERSION}"),
        });
    }

    let mut params = ParamSet::new(label);
    loop {
        let record_start = r.offset;
        let Some(name_len) = r.read_u32()? else {
            break;
        };
        if name_len > MAX_NAME_LEN {
            return Err(NnError::Format {
                offset: record_start,
                msg: format!("name length {name_len} exceeds limit {MAX_NAME_LEN}"),
            });
        }
        let mut name_bytes = vec![0u8; name_len as usize];
        r.read_exact(&mut name_bytes)?;
        let name = String::from_utf8(name_bytes).map_err(|_| NnError::Format {
            offset: record_start,
            msg: "parameter name is not valid UTF-8".to_string(),
        })?;
        let rank = r
            .read_u32()?
            .ok_or_else(|| r.format_err("file ends before rank field"))?;
        if rank > MAX_RANK {
            return Err(NnError::Format {
                offset: record_start,
                msg: format!("rank {rank} exceeds limit {MAX_RANK}"),
            });
        }
        let mut extents = Vec::with_capacity(rank as usize);
        let mut count: u64 = 1;
        for _ in 0..rank {
            let e = r
                .read_u32()?
                .ok_or_else(|| r.format_err("file ends inside extents"))?;
            count = count.saturating_mul(e as u64);
            extents.push(e as usize);
        }
        if count > MAX_VALUES {
            return Err(NnError::Format {
                offset: record_start,
                msg: format!("value count {count} exceeds limit {MAX_VALUES}"),
            });
        }
        let mut values = Vec::with_capacity(count as usize);
        let mut buf = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            values.push(f64::from_le_bytes(buf));
        }
        if params.get(&name).is_ok() {
            return Err(NnError::Format {
                offset: record_start,
                msg: format!("duplicate parameter \"{name}\""),
            });
        }
        let tensor = Tensor::new(extents, values).map_err(|e| NnError::Format {
            offset: record_start,
            msg: format!("inconsistent record for \"{name}\": {e}"),
        })?;
        params.insert(name, tensor);
    }
    Ok(params)
}

struct Counted<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Counted<R> {
    fn format_err(&self, msg: &str) -> NnError {
        NnError::Format {
            offset: self.offset,
            msg: msg.to_string(),
        }
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> Result<(), NnError> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                Err(self.format_err("unexpected end of file"))
            }
            Err(e) => Err(NnError::Io(e)),
        }
    }

    /// Reads a u32, or returns `None` on a clean end-of-file boundary.
    fn read_u32(&mut self) -> Result<Option<u32>, NnError> {
        let mut buf = [0u8; 4];
        let mut filled = 0;
        while filled < 4 {
            let n = self.inner.read(&mut buf[filled..]).map_err(NnError::Io)?;
            if n == 0 {
                if filled == 0 {
                    return Ok(None);
                }
                return Err(self.format_err("unexpected end of file inside u32"));
            }
            filled += n;
        }
        self.offset += 4;
        Ok(Some(u32::from_le_bytes(buf)))
    }
}
