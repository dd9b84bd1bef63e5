//! File formats: record CSV with JSON metadata sidecar, binary trace files,
//! result tables, and reproducibility manifests.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! re-read parses to bit-identical values and repeated runs of the same
//! configuration produce byte-identical outputs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complex_vec::ComplexVec;
use crate::error::{Error, Result};
use crate::hypothesis::{GameSpec, ProcessLabel, ProcessScore};
use crate::measurement::{BellRecord, PilotTag, RecordBatch};
use crate::process::ProcessSpec;
use crate::reconstruction::SweepPoint;
use crate::trace::TimeTrace;

/// Sidecar metadata describing a simulated record file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub process: ProcessSpec,
    pub n: usize,
    pub records: usize,
    pub squeezing_db: f64,
    pub transmissivity: f64,
    pub r_eff: f64,
    pub drift: [[f64; 2]; 2],
    pub noise_scale: f64,
    pub master_seed: u64,
    /// Records per RNG stream in batch simulation.
    pub sim_chunk: usize,
    /// Terms per partial sum in estimator reductions.
    pub sum_chunk: usize,
}

/// Writes one CSV row per (record, mode):
/// `sample_index,mode_index,zeta_re,zeta_im,pilot_tag`.
pub fn write_records_csv(path: &Path, batch: &RecordBatch) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "sample_index,mode_index,zeta_re,zeta_im,pilot_tag")?;
    for i in 0..batch.len() {
        let row = batch.zeta_row(i);
        let tag = batch.pilot(i).as_str();
        for (j, z) in row.iter().enumerate() {
            writeln!(w, "{},{},{},{},{}", batch.sample_index(i), j, z.re, z.im, tag)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a record CSV produced by [`write_records_csv`].
pub fn read_records_csv(path: &Path) -> Result<RecordBatch> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    match lines.next() {
        Some(header) => {
            let header = header?;
            if header.trim() != "sample_index,mode_index,zeta_re,zeta_im,pilot_tag" {
                return Err(Error::invalid(format!("unexpected CSV header {header:?}")));
            }
        }
        None => return Err(Error::invalid("empty record file")),
    }
    let mut records: Vec<BellRecord> = Vec::new();
    let mut current: Option<(u64, PilotTag, Vec<Complex64>)> = None;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::invalid(format!("malformed CSV row {line:?}")));
        }
        let sample_index: u64 = fields[0]
            .parse()
            .map_err(|_| Error::invalid("bad sample_index"))?;
        let mode_index: usize = fields[1]
            .parse()
            .map_err(|_| Error::invalid("bad mode_index"))?;
        let re: f64 = fields[2].parse().map_err(|_| Error::invalid("bad zeta_re"))?;
        let im: f64 = fields[3].parse().map_err(|_| Error::invalid("bad zeta_im"))?;
        let tag = PilotTag::parse(fields[4])?;
        let flush = matches!(&current, Some((idx, _, _)) if *idx != sample_index);
        if flush {
            let (idx, t, z) = current.take().expect("flush implies current");
            records.push(BellRecord {
                zeta: ComplexVec::new(z)?,
                sample_index: idx,
                pilot: t,
            });
        }
        let entry = current.get_or_insert_with(|| (sample_index, tag, Vec::new()));
        if entry.2.len() != mode_index {
            return Err(Error::invalid("mode rows out of order"));
        }
        entry.2.push(Complex64::new(re, im));
    }
    if let Some((idx, t, z)) = current.take() {
        records.push(BellRecord {
            zeta: ComplexVec::new(z)?,
            sample_index: idx,
            pilot: t,
        });
    }
    RecordBatch::from_records(records)
}

/// Pretty-printed JSON with trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

#[derive(Serialize, Deserialize)]
struct TraceHeader {
    sample_rate_hz: f64,
    t0_offset_s: f64,
    length: usize,
}

/// Binary trace file: one JSON header line, then little-endian f64 samples.
pub fn write_trace(path: &Path, trace: &TimeTrace) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = TraceHeader {
        sample_rate_hz: trace.sample_rate_hz,
        t0_offset_s: trace.t0_offset_s,
        length: trace.samples.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for s in &trace.samples {
        w.write_all(&s.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<TimeTrace> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header_line = String::new();
    r.read_line(&mut header_line)?;
    let header: TraceHeader = serde_json::from_str(header_line.trim_end())?;
    let mut buf = vec![0u8; header.length * 8];
    r.read_exact(&mut buf)?;
    let samples = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(TimeTrace {
        sample_rate_hz: header.sample_rate_hz,
        t0_offset_s: header.t0_offset_s,
        samples,
    })
}

/// CSV form of a trace for small fixtures: `index,value`.
pub fn write_trace_csv(path: &Path, trace: &TimeTrace) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index,value")?;
    for (i, s) in trace.samples.iter().enumerate() {
        writeln!(w, "{i},{s}")?;
    }
    w.flush()?;
    Ok(())
}

/// Slice table: `b,re,im,abs`.
pub fn write_slice_csv(path: &Path, slice: &[(f64, Complex64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "b,re,im,abs")?;
    for &(b, lam) in slice {
        writeln!(w, "{},{},{},{}", b, lam.re, lam.im, lam.norm())?;
    }
    w.flush()?;
    Ok(())
}

/// Sweep table: `overlap,success,stderr`.
pub fn write_sweep_csv(path: &Path, sweep: &[SweepPoint]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "overlap,success,stderr")?;
    for p in sweep {
        writeln!(w, "{},{},{}", p.overlap, p.success, p.stderr)?;
    }
    w.flush()?;
    Ok(())
}

/// Quadrature table: `mode_index,value`.
pub fn write_quadratures_csv(path: &Path, quadratures: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "mode_index,value")?;
    for (i, q) in quadratures.iter().enumerate() {
        writeln!(w, "{i},{q}")?;
    }
    w.flush()?;
    Ok(())
}

/// Game transcript. The hidden types are the sealed section: serialized last
/// and omitted entirely in blind mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameTranscript {
    pub spec: GameSpec,
    pub gammas: Vec<ComplexVec>,
    pub n_samples: usize,
    pub per_process: Vec<ProcessScore>,
    pub p_bar: f64,
    pub delta_p: Option<f64>,
    pub raw_success: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sealed_types: Option<Vec<ProcessLabel>>,
}

/// SHA-256 of a file, hex-encoded.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    let mut reader = BufReader::new(File::open(path)?);
    let mut buf = [0u8; 65536];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Reproducibility manifest embedded with every CLI run: re-running a
/// manifest's config and seed reproduces the outputs byte-identically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub master_seed: u64,
    /// The fully resolved configuration after flag overrides.
    pub config: serde_json::Value,
    /// SHA-256 of each input file consumed by the run.
    pub input_hashes: Vec<FileHash>,
    /// Output files written by the run.
    pub outputs: Vec<String>,
    pub sim_chunk: usize,
    pub sum_chunk: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{simulate_bell_batch, DriftModel, SqueezingSpec};
    use crate::trace::DEFAULT_SAMPLE_RATE_HZ;
    use tempfile::tempdir;

    #[test]
    fn record_csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let process = ProcessSpec::gaussian(3, 0.3).unwrap();
        let squeezing = SqueezingSpec::ideal(2.26);
        let drift = DriftModel::identity();
        let batch = simulate_bell_batch(&process, &squeezing, &drift, 50, 77).unwrap();
        let with_pilots =
            crate::measurement::inject_pilots(&batch, 10, 10.0, 77, &squeezing, &drift).unwrap();
        write_records_csv(&path, &with_pilots).unwrap();
        let back = read_records_csv(&path).unwrap();
        assert_eq!(back, with_pilots);
    }

    #[test]
    fn record_csv_rejects_bad_header() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(read_records_csv(&path).is_err());
    }

    #[test]
    fn trace_round_trip_binary_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("trace.bin");
        let trace = TimeTrace {
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            t0_offset_s: -0.5e-6,
            samples: (0..500).map(|i| (i as f64 * 0.13).sin() / 3.0).collect(),
        };
        write_trace(&path, &trace).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn json_round_trip_of_metadata() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("meta.json");
        let meta = RunMetadata {
            process: ProcessSpec::gaussian(2, 0.3).unwrap(),
            n: 2,
            records: 10,
            squeezing_db: 4.78,
            transmissivity: 1.0,
            r_eff: 0.55,
            drift: [[1.0, 0.0], [0.0, 1.0]],
            noise_scale: 1.0,
            master_seed: 42,
            sim_chunk: crate::seeding::SIM_CHUNK,
            sum_chunk: crate::seeding::SUM_CHUNK,
        };
        write_json(&path, &meta).unwrap();
        let back: RunMetadata = read_json(&path).unwrap();
        assert_eq!(back.process, meta.process);
        assert_eq!(back.master_seed, 42);
    }

    #[test]
    fn sha256_is_stable() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.txt");
        std::fs::write(&path, b"displacement").unwrap();
        let a = sha256_hex(&path).unwrap();
        let b = sha256_hex(&path).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }
}
