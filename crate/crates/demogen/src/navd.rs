//! Binary trajectory files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "NAVD" | version: u32 | count: u32 | trajectory*
//! trajectory = name_len: u32 | name: UTF-8 | seed: u64 | event: u8
//!            | step_count: u32 | step*
//! step = obs: f32[184] | act: f32[2]
//! ```
//!
//! Exactly `count` trajectories follow the header; trailing bytes are an
//! error. Values round-trip bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use simworld::{Event, OBS_LEN};

use crate::error::DemoError;

const MAGIC: &[u8; 4] = b"NAVD";
const VERSION: u32 = 1;
const MAX_NAME_LEN: u32 = 4096;
const MAX_STEPS: u32 = 1 << 20;
const MAX_TRAJECTORIES: u32 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct DemoStep {
    /// Observation seen before acting; `OBS_LEN` values.
    pub obs: Vec<f32>,
    /// Commanded (v, w).
    pub act: [f32; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub scene: String,
    /// World build seed; replays the episode's layout.
    pub seed: u64,
    /// Terminal event that ended the episode.
    pub event: Event,
    pub steps: Vec<DemoStep>,
}

fn encode_event(event: Event) -> Result<u8, DemoError> {
    match event {
        Event::Reached => Ok(0),
        Event::Collided => Ok(1),
        Event::Timeout => Ok(2),
        Event::Alive => Err(DemoError::Format {
            offset: 0,
            msg: "cannot store a trajectory that has not terminated".to_string(),
        }),
    }
}

fn decode_event(byte: u8, offset: u64) -> Result<Event, DemoError> {
    match byte {
        0 => Ok(Event::Reached),
        1 => Ok(Event::Collided),
        2 => Ok(Event::Timeout),
        other => Err(DemoError::Format {
            offset,
            msg: format!("unknown event code {other}"),
        }),
    }
}

pub fn save_trajectories(path: &Path, trajectories: &[Trajectory]) -> Result<(), DemoError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(trajectories.len() as u32).to_le_bytes())?;
    for t in trajectories {
        debug_assert!(t.steps.iter().all(|s| s.obs.len() == OBS_LEN));
        w.write_all(&(t.scene.len() as u32).to_le_bytes())?;
        w.write_all(t.scene.as_bytes())?;
        w.write_all(&t.seed.to_le_bytes())?;
        w.write_all(&[encode_event(t.event)?])?;
        w.write_all(&(t.steps.len() as u32).to_le_bytes())?;
        for s in &t.steps {
            for &v in &s.obs {
                w.write_all(&v.to_le_bytes())?;
            }
            for &v in &s.act {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_trajectories(path: &Path) -> Result<Vec<Trajectory>, DemoError> {
    let mut r = Counted {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DemoError::Format {
            offset: 0,
            msg: format!("bad magic {magic:02x?}, expected \"NAVD\""),
        });
    }
    let version = r.read_u32()?;
    if version != VERSION {
        return Err(DemoError::Format {
            offset: 4,
            msg: format!("unsupported version {version}, expected {VERSION}"),
        });
    }
    let count = r.read_u32()?;
    if count > MAX_TRAJECTORIES {
        return Err(DemoError::Format {
            offset: 8,
            msg: format!("trajectory count {count} exceeds limit {MAX_TRAJECTORIES}"),
        });
    }

    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let record_start = r.offset;
        let name_len = r.read_u32()?;
        if name_len > MAX_NAME_LEN {
            return Err(DemoError::Format {
                offset: record_start,
                msg: format!("name length {name_len} exceeds limit {MAX_NAME_LEN}"),
            });
        }
        let mut name_bytes = vec![0u8; name_len as usize];
        r.read_exact(&mut name_bytes)?;
        let scene = String::from_utf8(name_bytes).map_err(|_| DemoError::Format {
            offset: record_start,
            msg: "scene name is not valid UTF-8".to_string(),
        })?;
        let mut seed_bytes = [0u8; 8];
        r.read_exact(&mut seed_bytes)?;
        let seed = u64::from_le_bytes(seed_bytes);
        let mut event_byte = [0u8; 1];
        r.read_exact(&mut event_byte)?;
        let event = decode_event(event_byte[0], r.offset - 1)?;
        let step_count = r.read_u32()?;
        if step_count > MAX_STEPS {
            return Err(DemoError::Format {
                offset: record_start,
                msg: format!("step count {step_count} exceeds limit {MAX_STEPS}"),
            });
        }
        let mut steps = Vec::with_capacity(step_count as usize);
        let mut buf = [0u8; 4];
        for _ in 0..step_count {
            let mut obs = Vec::with_capacity(OBS_LEN);
            for _ in 0..OBS_LEN {
                r.read_exact(&mut buf)?;
                obs.push(f32::from_le_bytes(buf));
            }
            let mut act = [0f32; 2];
            for a in &mut act {
                r.read_exact(&mut buf)?;
                *a = f32::from_le_bytes(buf);
            }
            steps.push(DemoStep { obs, act });
        }
        out.push(Trajectory {
            scene,
            seed,
            event,
            steps,
        });
    }

    let mut extra = [0u8; 1];
    if r.inner.read(&mut extra).map_err(DemoError::Io)? != 0 {
        return Err(DemoError::Format {
            offset: r.offset,
            msg: "trailing data after final trajectory".to_string(),
        });
    }
    Ok(out)
}

struct Counted<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Counted<R> {
    fn read_exact(&mut self, buf: &mut [u8]) -> Result<(), DemoError> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Err(DemoError::Format {
                offset: self.offset,
                msg: "unexpected end of file".to_string(),
            }),
            Err(e) => Err(DemoError::Io(e)),
        }
    }

    fn read_u32(&mut self) -> Result<u32, DemoError> {
        let mut buf = [0u8; 4];
        self.read_exact(&mut buf)?;
        Ok(u32::from_le_bytes(buf))
    }
}
