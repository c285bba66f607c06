//! Versioned binary model blob. Layout, all integers and reals little-endian:
//!
//! ```text
//! magic "OPIUMMDL" | version u32 | hidden u32 | classes u32 | dim u32
//! weight_seed u64 | ridge f64 | targets u8 | symmetrize_every u64 | samples_seen u64
//! input weights  hidden × 785 f64
//! output weights classes × dim f64
//! theta          dim × dim f64
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::features::{FeatureMap, INPUT_WITH_BIAS};
use super::model::{PseudoInverseModel, TargetEncoding};

pub const MODEL_MAGIC: [u8; 8] = *b"OPIUMMDL";
pub const MODEL_VERSION: u32 = 1;

fn write_reals<W: Write, T: Scalar>(out: &mut W, values: &[T]) -> Result<()> {
    for v in values {
        out.write_f64::<LittleEndian>(v.as_f64())?;
    }
    Ok(())
}

fn read_reals<R: Read, T: Scalar>(input: &mut R, n: usize) -> Result<Vec<T>> {
    let mut raw = vec![0f64; n];
    input
        .read_f64_into::<LittleEndian>(&mut raw)
        .map_err(|e| Error::Format(format!("truncated model blob: {e}")))?;
    Ok(raw.into_iter().map(T::from_f64_lossy).collect())
}

fn dim_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Invalid(format!("{v} exceeds the model blob's u32 fields")))
}

impl<T: Scalar> PseudoInverseModel<T> {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&MODEL_MAGIC)?;
        out.write_u32::<LittleEndian>(MODEL_VERSION)?;
        out.write_u32::<LittleEndian>(dim_u32(self.feature.hidden())?)?;
        out.write_u32::<LittleEndian>(dim_u32(self.classes)?)?;
        out.write_u32::<LittleEndian>(dim_u32(self.dim())?)?;
        out.write_u64::<LittleEndian>(self.feature.seed())?;
        out.write_f64::<LittleEndian>(self.ridge)?;
        out.write_u8(match self.targets {
            TargetEncoding::ZeroOne => 0,
            TargetEncoding::PlusMinusOne => 1,
        })?;
        out.write_u64::<LittleEndian>(self.symmetrize_every)?;
        out.write_u64::<LittleEndian>(self.samples_seen)?;
        write_reals(&mut out, self.feature.input_weights())?;
        write_reals(&mut out, &self.weights)?;
        write_reals(&mut out, &self.theta)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input
            .read_exact(&mut magic)
            .map_err(|_| Error::Format("model blob too short".into()))?;
        if magic != MODEL_MAGIC {
            return Err(Error::Format("not a model blob (bad magic)".into()));
        }
        let header = |e: std::io::Error| Error::Format(format!("truncated model header: {e}"));
        let version = input.read_u32::<LittleEndian>().map_err(header)?;
        if version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {version}")));
        }
        let hidden = input.read_u32::<LittleEndian>().map_err(header)? as usize;
        let classes = input.read_u32::<LittleEndian>().map_err(header)? as usize;
        let dim = input.read_u32::<LittleEndian>().map_err(header)? as usize;
        let seed = input.read_u64::<LittleEndian>().map_err(header)?;
        let ridge = input.read_f64::<LittleEndian>().map_err(header)?;
        let targets = match input.read_u8().map_err(header)? {
            0 => TargetEncoding::ZeroOne,
            1 => TargetEncoding::PlusMinusOne,
            t => return Err(Error::Format(format!("unknown target encoding {t}"))),
        };
        let symmetrize_every = input.read_u64::<LittleEndian>().map_err(header)?;
        let samples_seen = input.read_u64::<LittleEndian>().map_err(header)?;
        let expected_dim = if hidden == 0 { INPUT_WITH_BIAS } else { hidden };
        if dim != expected_dim {
            return Err(Error::Format(format!(
                "feature dimension {dim} inconsistent with {hidden} hidden neurons"
            )));
        }
        let input_weights = read_reals(&mut input, hidden * INPUT_WITH_BIAS)?;
        let weights = read_reals(&mut input, classes * dim)?;
        let theta = read_reals(&mut input, dim * dim)?;
        Ok(PseudoInverseModel {
            feature: FeatureMap::from_parts(hidden, seed, input_weights),
            classes,
            weights,
            theta,
            ridge,
            targets,
            symmetrize_every,
            samples_seen,
        })
    }
}

#[cfg(test)]
mod tests {
    use crate::opium::{ModelConfig, PseudoInverseModel};

    #[test]
    fn blob_round_trip() {
        let mut m = PseudoInverseModel::<f64>::new(&ModelConfig::new(12, 4, 77)).unwrap();
        let mut px = [0u8; 784];
        for k in 0..20 {
            px[k * 30] = 200;
            m.train_image(&px, k % 4).unwrap();
        }
        let mut blob = Vec::new();
        m.write_to(&mut blob).unwrap();
        assert_eq!(&blob[..8], b"OPIUMMDL");
        let back = PseudoInverseModel::<f64>::read_from(blob.as_slice()).unwrap();
        assert_eq!(back, m);
        assert!(PseudoInverseModel::<f64>::read_from(&blob[..blob.len() - 3]).is_err());
        let mut bad = blob.clone();
        bad[0] = b'X';
        assert!(PseudoInverseModel::<f64>::read_from(bad.as_slice()).is_err());
    }
}
