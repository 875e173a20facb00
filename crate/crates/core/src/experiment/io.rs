//! Sample, record and manifest files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::{Direction, MovementRecord, MovementStatus, TrajectorySample};

pub const SAMPLES_FILE: &str = "samples.csv";
pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

const SAMPLE_HEADER: [&str; 27] = [
    "t", "movement_id", "target_id", "direction",
    "x_d", "y_d", "vx_d", "vy_d",
    "x", "y", "vx", "vy",
    "q1", "q2", "q3", "dq1", "dq2", "dq3",
    "tau1", "tau2", "tau3",
    "w_elbow_x", "w_elbow_y", "w_wrist_x", "w_wrist_y", "w_hand_x", "w_hand_y",
];

fn header() -> &'static [&'static str] {
    &SAMPLE_HEADER
}

const RECORD_HEADER: [&str; 11] = [
    "movement_id", "target_id", "direction", "r_planned", "r_executed", "rmse_pos", "rmse_vel",
    "peak_speed", "settle_time", "final_error", "status",
];

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

fn sample_row(s: &TrajectorySample) -> Vec<String> {
    let mut row = vec![
        fmt(s.t),
        s.movement_id.to_string(),
        s.target_id.to_string(),
        s.direction.as_str().to_string(),
    ];
    let floats = s
        .x_d
        .iter()
        .chain(&s.v_d)
        .chain(&s.x)
        .chain(&s.v)
        .chain(&s.q)
        .chain(&s.dq)
        .chain(&s.tau)
        .chain(s.w_ld.iter().flatten());
    row.extend(floats.map(|v| fmt(*v)));
    row
}

/// Streams samples as CSV rows.
pub struct SampleWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SampleWriter<W> {
    pub fn new(out: W, with_header: bool) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        if with_header {
            inner.write_record(header()).map_err(csv_err)?;
        }
        Ok(Self { inner })
    }

    pub fn write(&mut self, s: &TrajectorySample) -> Result<()> {
        self.inner.write_record(sample_row(s)).map_err(csv_err)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::io("<samples>", e))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::io("<csv>", std::io::Error::other(e))
}

pub fn write_samples(samples: &[TrajectorySample], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = SampleWriter::new(BufWriter::new(file), true)?;
    for s in samples {
        w.write(s).map_err(|e| with_path(e, path))?;
    }
    w.finish().map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

pub fn read_samples(path: &Path) -> Result<Vec<TrajectorySample>> {
    let mut reader = open_csv(path)?;
    let malformed = |row: u64, msg: String| Error::Malformed {
        path: path.to_path_buf(),
        row: row as usize,
        msg,
    };
    let head = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    if head.iter().ne(header().iter().copied()) {
        return Err(malformed(1, "unexpected header".into()));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            malformed(row, e.to_string())
        })?;
        let row = rec.position().map_or(0, |p| p.line());
        let f = |i: usize| -> Result<f64> {
            let v: f64 = rec[i]
                .parse()
                .map_err(|_| malformed(row, format!("column {} is not a number: `{}`", header()[i], &rec[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(malformed(row, format!("column {} is not finite", header()[i])))
            }
        };
        let u = |i: usize| -> Result<u32> {
            rec[i]
                .parse()
                .map_err(|_| malformed(row, format!("column {} is not an id: `{}`", header()[i], &rec[i])))
        };
        let direction = Direction::parse(&rec[3])
            .ok_or_else(|| malformed(row, format!("unknown direction `{}`", &rec[3])))?;
        let pair = |i: usize| -> Result<[f64; 2]> { Ok([f(i)?, f(i + 1)?]) };
        let triple = |i: usize| -> Result<[f64; 3]> { Ok([f(i)?, f(i + 1)?, f(i + 2)?]) };
        out.push(TrajectorySample {
            t: f(0)?,
            movement_id: u(1)?,
            target_id: u(2)?,
            direction,
            x_d: pair(4)?,
            v_d: pair(6)?,
            x: pair(8)?,
            v: pair(10)?,
            q: triple(12)?,
            dq: triple(15)?,
            tau: triple(18)?,
            w_ld: [pair(21)?, pair(23)?, pair(25)?],
        });
    }
    Ok(out)
}

pub fn write_records(records: &[MovementRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(RECORD_HEADER).map_err(|e| with_path(csv_err(e), path))?;
    for r in records {
        let row = [
            r.movement_id.to_string(),
            r.target_id.to_string(),
            r.direction.as_str().to_string(),
            fmt(r.r_planned),
            fmt(r.r_executed),
            fmt(r.rmse_pos),
            fmt(r.rmse_vel),
            fmt(r.peak_speed),
            fmt(r.settle_time),
            fmt(r.final_error),
            r.status.as_str().to_string(),
        ];
        w.write_record(&row).map_err(|e| with_path(csv_err(e), path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<MovementRecord>> {
    let mut reader = open_csv(path)?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let malformed = |row: u64, msg: String| Error::Malformed {
            path: path.to_path_buf(),
            row: row as usize,
            msg,
        };
        let rec = rec.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let row = rec.position().map_or(0, |p| p.line());
        if rec.len() != RECORD_HEADER.len() {
            return Err(malformed(row, format!("expected {} columns", RECORD_HEADER.len())));
        }
        let f = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| malformed(row, format!("column {} is not a number", RECORD_HEADER[i])))
        };
        let u = |i: usize| -> Result<u32> {
            rec[i]
                .parse()
                .map_err(|_| malformed(row, format!("column {} is not an id", RECORD_HEADER[i])))
        };
        out.push(MovementRecord {
            movement_id: u(0)?,
            target_id: u(1)?,
            direction: Direction::parse(&rec[2]).ok_or_else(|| malformed(row, "unknown direction".into()))?,
            r_planned: f(3)?,
            r_executed: f(4)?,
            rmse_pos: f(5)?,
            rmse_vel: f(6)?,
            peak_speed: f(7)?,
            settle_time: f(8)?,
            final_error: f(9)?,
            status: MovementStatus::parse(&rec[10]).ok_or_else(|| malformed(row, "unknown status".into()))?,
        });
    }
    Ok(out)
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    /// Loadable configuration text (flat dotted keys).
    pub config: String,
    /// File name to SHA-256 of its bytes.
    pub hashes: BTreeMap<String, String>,
}

impl RunManifest {
    /// Hashes `files` inside `dir`.
    pub fn new(config: String, dir: &Path, files: &[&str]) -> Result<Self> {
        let mut hashes = BTreeMap::new();
        for name in files {
            hashes.insert(name.to_string(), sha256_hex(&dir.join(name))?);
        }
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Ok(Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            config,
            hashes,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "version = \"{}\"\ntimestamp = {}\n\n[hashes]\n",
            self.version, self.timestamp
        );
        for (k, v) in &self.hashes {
            s.push_str(&format!("\"{k}\" = \"{v}\"\n"));
        }
        s.push_str("\n[config]\n");
        s.push_str(&self.config);
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("{}: {e}", path.display())))?;
        let missing = |k: &str| Error::Config(format!("{}: missing `{k}`", path.display()));
        let version = table.get("version").and_then(|v| v.as_str()).ok_or_else(|| missing("version"))?;
        let timestamp = table
            .get("timestamp")
            .and_then(|v| v.as_integer())
            .ok_or_else(|| missing("timestamp"))?;
        let hashes = table
            .get("hashes")
            .and_then(|v| v.as_table())
            .ok_or_else(|| missing("hashes"))?
            .iter()
            .filter_map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_string())))
            .collect();
        let config = text
            .split_once("[config]\n")
            .map(|(_, c)| c.to_string())
            .ok_or_else(|| missing("config"))?;
        Ok(Self {
            version: version.to_string(),
            timestamp: timestamp as u64,
            config,
            hashes,
        })
    }

    /// Re-hashes the listed files and reports the first mismatch.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for (name, hash) in &self.hashes {
            let now = sha256_hex(&dir.join(name))?;
            if &now != hash {
                return Err(Error::Config(format!("hash mismatch for {name}")));
            }
        }
        Ok(())
    }
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    std::fs::write(path, manifest.to_text()).map_err(|e| Error::io(path, e))
}
