//! Binary model container.
//!
//! Little-endian layout, version 1:
//!
//! ```text
//! magic     4 bytes  "GCFM"
//! version   u32
//! arch      u8       0 linear, 1 resmlp, 2 conv
//! window    u32
//! channels  u32
//! horizon   u32
//! scaler    channels x (mean f64, std f64)
//! features  u32 count, then per name: u32 byte length + UTF-8 bytes
//! params    u64 count, then f64 values
//! ```

use alloc::string::String;
use alloc::vec::Vec;

use super::model::TrainedModel;
use super::nn::{Architecture, ModelParameters};
use super::scaler::Scaler;
use super::ForecastError;

const MAGIC: &[u8; 4] = b"GCFM";
pub const CODEC_VERSION: u32 = 1;

pub fn encode_model(m: &TrainedModel) -> Vec<u8> {
    let p = &m.params;
    let mut out = Vec::with_capacity(64 + 8 * p.params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CODEC_VERSION.to_le_bytes());
    out.push(p.arch.tag());
    for v in [p.window, p.channels, p.horizon] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for c in 0..m.scaler.channels() {
        out.extend_from_slice(&m.scaler.mean[c].to_le_bytes());
        out.extend_from_slice(&m.scaler.std[c].to_le_bytes());
    }
    out.extend_from_slice(&(m.features.len() as u32).to_le_bytes());
    for f in &m.features {
        out.extend_from_slice(&(f.len() as u32).to_le_bytes());
        out.extend_from_slice(f.as_bytes());
    }
    out.extend_from_slice(&(p.params.len() as u64).to_le_bytes());
    for v in &p.params {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ForecastError> {
        if self.buf.len() < n {
            return Err(ForecastError::Codec("truncated"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, ForecastError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64, ForecastError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64, ForecastError> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<TrainedModel, ForecastError> {
    let mut r = Reader { buf: bytes };
    if r.take(4)? != MAGIC {
        return Err(ForecastError::Codec("bad magic"));
    }
    if r.u32()? != CODEC_VERSION {
        return Err(ForecastError::Codec("unsupported version"));
    }
    let arch = Architecture::from_tag(r.take(1)?[0])
        .ok_or(ForecastError::Codec("unknown architecture"))?;
    let window = r.u32()? as usize;
    let channels = r.u32()? as usize;
    let horizon = r.u32()? as usize;
    if channels == 0 || channels > 4096 {
        return Err(ForecastError::Codec("bad channel count"));
    }
    let mut scaler = Scaler {
        mean: Vec::with_capacity(channels),
        std: Vec::with_capacity(channels),
    };
    for _ in 0..channels {
        scaler.mean.push(r.f64()?);
        scaler.std.push(r.f64()?);
    }
    let n_features = r.u32()? as usize;
    if n_features + 1 != channels {
        return Err(ForecastError::Codec(
            "feature count does not match channels",
        ));
    }
    let mut features = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        let len = r.u32()? as usize;
        let s = core::str::from_utf8(r.take(len)?)
            .map_err(|_| ForecastError::Codec("feature name is not UTF-8"))?;
        features.push(String::from(s));
    }
    let n = r.u64()? as usize;
    if n != ModelParameters::num_params_for(arch, window, channels, horizon)
        || window < arch.min_window()
        || horizon == 0
    {
        return Err(ForecastError::Codec(
            "parameter count does not match shapes",
        ));
    }
    if r.buf.len() != 8 * n {
        return Err(ForecastError::Codec("trailing or missing bytes"));
    }
    let params = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    if params.iter().any(|v| !v.is_finite())
        || scaler
            .std
            .iter()
            .chain(&scaler.mean)
            .any(|v| !v.is_finite())
    {
        return Err(ForecastError::Codec("non-finite values"));
    }
    Ok(TrainedModel {
        params: ModelParameters {
            arch,
            window,
            channels,
            horizon,
            params,
        },
        scaler,
        features,
    })
}
