use crate::pipeline::GLYPH_PIXELS;
use crate::rng::PortableRng;
use crate::scalar::Scalar;

/// Input width including the constant bias input.
pub const INPUT_WITH_BIAS: usize = GLYPH_PIXELS + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Scaled pixels followed by a constant 1.
    IdentityWithBias,
    /// Logistic squash of a fixed random projection of the biased input.
    RandomProjection,
}

/// The fixed input layer: either the identity (linear classifier) or a
/// random projection with logistic activation (extreme learning machine).
/// Input weights are drawn once and never trained.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    hidden: usize,
    seed: u64,
    /// `hidden × 785`, row-major, bias weight last in each row.
    input_weights: Vec<T>,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn linear() -> Self {
        FeatureMap {
            hidden: 0,
            seed: 0,
            input_weights: Vec::new(),
        }
    }

    /// Draws `hidden × 785` weights uniformly from `[-1, 1)`, row by row.
    pub fn random(hidden: usize, seed: u64) -> Self {
        if hidden == 0 {
            return Self::linear();
        }
        let mut rng = PortableRng::new(seed);
        let input_weights = (0..hidden * INPUT_WITH_BIAS)
            .map(|_| T::from_f64_lossy(rng.uniform(-1.0, 1.0)))
            .collect();
        FeatureMap {
            hidden,
            seed,
            input_weights,
        }
    }

    pub(crate) fn from_parts(hidden: usize, seed: u64, input_weights: Vec<T>) -> Self {
        assert_eq!(input_weights.len(), hidden * INPUT_WITH_BIAS);
        FeatureMap {
            hidden,
            seed,
            input_weights,
        }
    }

    pub fn kind(&self) -> FeatureKind {
        if self.hidden == 0 {
            FeatureKind::IdentityWithBias
        } else {
            FeatureKind::RandomProjection
        }
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_weights(&self) -> &[T] {
        &self.input_weights
    }

    /// Feature dimension `D`: 785 for the linear map, `hidden` otherwise.
    pub fn dim(&self) -> usize {
        if self.hidden == 0 {
            INPUT_WITH_BIAS
        } else {
            self.hidden
        }
    }

    pub fn features(&self, pixels: &[u8]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.features_into(pixels, &mut out);
        out
    }

    pub fn features_into(&self, pixels: &[u8], out: &mut [T]) {
        assert_eq!(pixels.len(), GLYPH_PIXELS, "feature map expects 28x28 images");
        assert_eq!(out.len(), self.dim());
        let scale = T::from_f64_lossy(255.0);
        if self.hidden == 0 {
            for (o, &p) in out.iter_mut().zip(pixels) {
                *o = T::from_u8(p).unwrap() / scale;
            }
            out[GLYPH_PIXELS] = T::one();
            return;
        }
        // zero pixels contribute nothing to the projection
        let active: Vec<(usize, T)> = pixels
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p != 0)
            .map(|(i, &p)| (i, T::from_u8(p).unwrap() / scale))
            .collect();
        for (o, row) in out.iter_mut().zip(self.input_weights.chunks_exact(INPUT_WITH_BIAS)) {
            let z = active
                .iter()
                .fold(T::zero(), |acc, &(i, x)| acc + row[i] * x)
                + row[GLYPH_PIXELS];
            *o = logistic(z);
        }
    }
}

pub fn logistic<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}
