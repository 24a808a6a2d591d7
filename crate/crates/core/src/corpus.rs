//! Seeded random generators for test corpora and verification suites.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{FourierOperator, ModeBasis, TrigPoly};
use crate::symbol::{Branches, ClassicalSymbol};
use crate::zeta::{RegularizedOperator, SpectralPolynomial};

/// Deterministic source of random operators and symbols.
#[derive(Debug, Clone)]
pub struct Corpus {
    basis: ModeBasis,
    rng: ChaCha8Rng,
}

impl Corpus {
    pub fn new(basis: ModeBasis, seed: u64) -> Self {
        Self {
            basis,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn basis(&self) -> ModeBasis {
        self.basis
    }

    pub fn complex(&mut self) -> C64 {
        C64::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))
    }

    /// Smoothing kernel with Gaussian envelope `exp(-(j² + k²)/(2σ²))`,
    /// `σ = max(2, N/5)`.
    pub fn smoothing(&mut self, amplitude: f64) -> RegularizedOperator {
        let sigma = (self.basis.cutoff() as f64 / 5.0).max(2.0);
        let dim = self.basis.dim();
        let raw: Vec<C64> = (0..dim * dim).map(|_| self.complex()).collect();
        let kernel = FourierOperator::from_fn(self.basis, |j, k| {
            let idx = self.basis.index(j).unwrap() * dim + self.basis.index(k).unwrap();
            let envelope = (-((j * j + k * k) as f64) / (2.0 * sigma * sigma)).exp();
            raw[idx] * amplitude * envelope
        });
        RegularizedOperator::from_kernel(kernel)
    }

    /// `c·Id + K` with `c` near 1 and a smoothing `K` of unit amplitude.
    pub fn element(&mut self) -> RegularizedOperator {
        let c = C64::new(1.0, 0.0) + self.complex() * 0.5;
        let k = self.smoothing(1.0);
        RegularizedOperator::new(SpectralPolynomial::identity().scale(c), k.kernel().clone())
    }

    /// Trigonometric polynomial with frequencies in `-radius..=radius`.
    pub fn trig_poly(&mut self, radius: i64) -> TrigPoly {
        let pairs: Vec<(i64, C64)> = (-radius..=radius).map(|n| (n, self.complex())).collect();
        TrigPoly::from_pairs(pairs)
    }

    /// Random symbol whose branches satisfy `b⁻ = sign·b⁺`; `sign = 1` gives
    /// the odd class, `sign = -1` the even class.
    pub fn parity_symbol(&mut self, sign: f64, depth: usize) -> ClassicalSymbol {
        let order = self.rng.gen_range(-3..=3);
        let comps = (0..=depth)
            .map(|_| {
                let p = self.trig_poly(2);
                Branches::new(p.clone(), p.scale(C64::new(sign, 0.0)))
            })
            .collect();
        ClassicalSymbol::new(order, comps, false).expect("nonempty components")
    }

    /// Random symbol with independent branches.
    pub fn generic_symbol(&mut self, depth: usize) -> ClassicalSymbol {
        let order = self.rng.gen_range(-3..=3);
        let comps = (0..=depth)
            .map(|_| Branches::new(self.trig_poly(2), self.trig_poly(2)))
            .collect();
        ClassicalSymbol::new(order, comps, false).expect("nonempty components")
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{classify_parity, ParityClass};

    #[test]
    fn seeded_corpora_repeat() {
        let b = ModeBasis::new(8).unwrap();
        let a = Corpus::new(b, 42).element();
        let c = Corpus::new(b, 42).element();
        assert_eq!(a, c);
        assert!(a.decay_report().certified);
    }

    #[test]
    fn parity_generators() {
        let mut c = Corpus::new(ModeBasis::new(8).unwrap(), 1);
        assert_eq!(classify_parity(&c.parity_symbol(1.0, 4)), ParityClass::Odd);
        assert_eq!(classify_parity(&c.parity_symbol(-1.0, 4)), ParityClass::Even);
    }
}
