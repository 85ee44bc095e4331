//! Mono WAV input and output.

use std::path::Path;

use crate::error::{Error, Result};
use crate::frontend::{MAX_SAMPLE_RATE, MIN_SAMPLE_RATE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Int16,
    Int24,
    Float32,
}

impl SampleFormat {
    fn spec(self, fs: u32) -> hound::WavSpec {
        let (bits_per_sample, sample_format) = match self {
            SampleFormat::Int16 => (16, hound::SampleFormat::Int),
            SampleFormat::Int24 => (24, hound::SampleFormat::Int),
            SampleFormat::Float32 => (32, hound::SampleFormat::Float),
        };
        hound::WavSpec {
            channels: 1,
            sample_rate: fs,
            bits_per_sample,
            sample_format,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    /// Samples in `[-1, 1]` full scale.
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub format: SampleFormat,
}

impl Audio {
    pub fn fs(&self) -> f64 {
        self.sample_rate as f64
    }
}

pub fn read_wav(path: &Path) -> Result<Audio> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav(other),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Signal(format!(
            "{}: {} channels; only mono is supported",
            path.display(),
            spec.channels
        )));
    }
    let fs = spec.sample_rate as f64;
    if !(MIN_SAMPLE_RATE..=MAX_SAMPLE_RATE).contains(&fs) {
        return Err(Error::Signal(format!(
            "{}: sample rate {} Hz outside {MIN_SAMPLE_RATE}-{MAX_SAMPLE_RATE} Hz",
            path.display(),
            spec.sample_rate
        )));
    }
    let (samples, format) = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, bits @ (16 | 24)) => {
            let full = (1i64 << (bits - 1)) as f64;
            let s = reader
                .into_samples::<i32>()
                .map(|v| v.map(|x| x as f64 / full))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (s, if bits == 16 { SampleFormat::Int16 } else { SampleFormat::Int24 })
        }
        (hound::SampleFormat::Float, 32) => {
            let s = reader
                .into_samples::<f32>()
                .map(|v| v.map(|x| x as f64))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (s, SampleFormat::Float32)
        }
        (fmt, bits) => {
            return Err(Error::Signal(format!(
                "{}: unsupported sample format {fmt:?} {bits}-bit",
                path.display()
            )))
        }
    };
    Ok(Audio {
        samples,
        sample_rate: spec.sample_rate,
        format,
    })
}

/// Writes `samples`; integer formats are rounded and clipped to full scale.
pub fn write_wav(path: &Path, samples: &[f64], sample_rate: u32, format: SampleFormat) -> Result<()> {
    let mut w = hound::WavWriter::create(path, format.spec(sample_rate)).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav(other),
    })?;
    match format {
        SampleFormat::Float32 => {
            for &v in samples {
                w.write_sample(v as f32)?;
            }
        }
        SampleFormat::Int16 | SampleFormat::Int24 => {
            let bits = if format == SampleFormat::Int16 { 16 } else { 24 };
            let full = (1i64 << (bits - 1)) as f64;
            for &v in samples {
                let q = (v * full).round().clamp(-full, full - 1.0) as i32;
                w.write_sample(q)?;
            }
        }
    }
    w.finalize()?;
    Ok(())
}
