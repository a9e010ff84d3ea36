//! Orthogonal discrete wavelet transform with Daubechies filters.
//!
//! Each analysis step convolves the whole-point symmetric extension of the
//! input with the filter pair and keeps every second output, producing
//! `floor((n - 1) / 2) + L / 2` coefficients per band for an input of length
//! `n` and filter length `L`. That is enough coefficients to reconstruct the
//! original `n` samples exactly, so inputs of any length are supported.

use crate::error::{Error, Result};

/// Daubechies scaling filter with 24 vanishing moments (48 taps), normalized
/// so the taps sum to `sqrt(2)`.
#[allow(clippy::excessive_precision)]
pub const DB24_LOWPASS: [f64; 48] = [
    0.0001914358009475513695026138,
    0.003082081714905494436206199,
    0.02248233994971641072358415,
    0.09726223583362519663806546,
    0.2729089160677263268706137,
    0.5043710408399249919771877,
    0.5749392210955419968460808,
    0.2809855532337118833442626,
    -0.1872714068851562376981887,
    -0.3179430789993627375453948,
    0.004776613684344728187950198,
    0.2392373887803108551973268,
    0.04252872964148383258147364,
    -0.1711753513703468896897639,
    -0.03877717357792001620177595,
    0.1210163034692242362312637,
    0.02098011370914481534980884,
    -0.08216165420800166702291466,
    -0.004578436241819221637997516,
    0.05130162003998087915555335,
    -0.00494470942812562829981592,
    -0.02821310709490189098113895,
    0.0076617218816465858973299,
    0.01304997087108573583052494,
    -0.006291435370018187780721844,
    -0.004746568786323113800477797,
    0.003736046178282523345179052,
    0.001153764936839481504858282,
    -0.001696456818974824394274535,
    -0.00004416184856141520063365959,
    0.0005861270593183109933716735,
    -0.0001181233237969554740613021,
    -0.0001460079817762616838924302,
    0.00006559388639305634085303739,
    0.00002183241460466558363365044,
    -0.0000202288829261269768286086,
    0.00000001341157750809114719319938,
    0.000003901100338597702610409014,
    -0.0000008980253143938407724149927,
    -0.0000004032507756879971624098983,
    0.0000002166339653278574639176394,
    -0.0000000005057645419792500308492509,
    -0.00000002255740388176086107368822,
    0.000000005157776789671999638950774,
    0.0000000004748375824256231118094454,
    -0.00000000040246586445843797742515,
    0.00000000006991801157638230974132696,
    -0.000000000004342782503803710247259038,
];

/// Analysis/synthesis filter pair of an orthogonal wavelet.
#[derive(Debug, Clone)]
pub struct FilterBank {
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl FilterBank {
    /// Builds the quadrature mirror pair `g[n] = (-1)^n h[L-1-n]`.
    pub fn from_lowpass(lowpass: &[f64]) -> Result<Self> {
        if lowpass.len() < 2 || lowpass.len() % 2 != 0 {
            return Err(Error::Shape(format!(
                "orthogonal filter length must be even and >= 2, got {}",
                lowpass.len()
            )));
        }
        let l = lowpass.len();
        let highpass = (0..l)
            .map(|n| if n % 2 == 0 { lowpass[l - 1 - n] } else { -lowpass[l - 1 - n] })
            .collect();
        Ok(Self {
            lowpass: lowpass.to_vec(),
            highpass,
        })
    }

    pub fn daubechies24() -> Self {
        Self::from_lowpass(&DB24_LOWPASS).expect("static filter")
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    /// Number of coefficients per band produced from `n` input samples.
    pub fn coeff_len(&self, n: usize) -> usize {
        (n - 1) / 2 + self.len() / 2
    }

    /// Splits `x` into approximation and detail coefficients.
    pub fn analyze(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        let l = self.len();
        let m = self.coeff_len(n);
        // Coefficient j reads x_ext[2j - (L - 2) .. 2j + 1].
        let left = l as isize - 2;
        let ext: Vec<f64> = (0..2 * m + l - 2)
            .map(|i| x[reflect(i as isize - left, n)])
            .collect();
        let mut approx = vec![0.0; m];
        let mut detail = vec![0.0; m];
        for j in 0..m {
            let seg = &ext[2 * j..2 * j + l];
            let (mut a, mut d) = (0.0, 0.0);
            for ((s, h), g) in seg.iter().zip(&self.lowpass).zip(&self.highpass) {
                a += h * s;
                d += g * s;
            }
            approx[j] = a;
            detail[j] = d;
        }
        (approx, detail)
    }

    /// Inverse of [`analyze`](Self::analyze) for an output of length `n`.
    /// A missing detail band is treated as all zeros.
    pub fn synthesize(&self, approx: &[f64], detail: Option<&[f64]>, n: usize) -> Result<Vec<f64>> {
        let m = self.coeff_len(n);
        if approx.len() != m || detail.is_some_and(|d| d.len() != m) {
            return Err(Error::Shape(format!(
                "expected {m} coefficients per band for {n} samples, got {}",
                approx.len()
            )));
        }
        let l = self.len();
        let mut out = vec![0.0; n];
        for j in 0..m {
            let a = approx[j];
            let d = detail.map_or(0.0, |d| d[j]);
            // Sample index m_out = 2j + k - (L - 2).
            let base = 2 * j as isize - (l as isize - 2);
            let k_lo = (-base).max(0) as usize;
            let k_hi = ((n as isize - base).min(l as isize)).max(0) as usize;
            for k in k_lo..k_hi {
                out[(base + k as isize) as usize] += self.lowpass[k] * a + self.highpass[k] * d;
            }
        }
        Ok(out)
    }
}

/// Whole-point symmetric reflection of index `i` into `0..n`.
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let r = i.rem_euclid(period);
    if r < n as isize {
        r as usize
    } else {
        (period - r) as usize
    }
}

/// Multilevel decomposition: approximation at the coarsest level plus the
/// detail bands from the finest (level 1) to the coarsest.
#[derive(Debug, Clone)]
pub struct WaveletCoeffs {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    /// Input length at each level, finest first.
    pub lengths: Vec<usize>,
}

pub fn wavedec(bank: &FilterBank, x: &[f64], levels: u32) -> Result<WaveletCoeffs> {
    check_levels(x.len(), levels)?;
    let mut approx = x.to_vec();
    let mut details = Vec::with_capacity(levels as usize);
    let mut lengths = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        lengths.push(approx.len());
        let (a, d) = bank.analyze(&approx);
        details.push(d);
        approx = a;
    }
    Ok(WaveletCoeffs {
        approx,
        details,
        lengths,
    })
}

pub fn waverec(bank: &FilterBank, coeffs: &WaveletCoeffs) -> Result<Vec<f64>> {
    let mut approx = coeffs.approx.clone();
    for (detail, &n) in coeffs.details.iter().zip(&coeffs.lengths).rev() {
        approx = bank.synthesize(&approx, Some(detail), n)?;
    }
    Ok(approx)
}

/// Approximation series `S_J`: decompose to `levels`, zero every detail
/// band and reconstruct. The output has the same length as `x`.
pub fn approximation(bank: &FilterBank, x: &[f64], levels: u32) -> Result<Vec<f64>> {
    check_levels(x.len(), levels)?;
    let mut approx = x.to_vec();
    let mut lengths = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        lengths.push(approx.len());
        approx = bank.analyze(&approx).0;
    }
    for &n in lengths.iter().rev() {
        approx = bank.synthesize(&approx, None, n)?;
    }
    Ok(approx)
}

fn check_levels(n: usize, levels: u32) -> Result<()> {
    if levels == 0 || levels > 30 {
        return Err(Error::InvalidLevel {
            method: "wavelet",
            level: levels,
        });
    }
    let needed = 1usize << levels;
    if n < needed {
        return Err(Error::TooShort { needed, got: n });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-50.0..150.0)).collect()
    }

    #[test]
    fn db24_is_orthonormal() {
        let h = &DB24_LOWPASS;
        assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-13);
        for shift in 0..24 {
            let dot: f64 = (0..48 - 2 * shift).map(|n| h[n] * h[n + 2 * shift]).sum();
            let expect = if shift == 0 { 1.0 } else { 0.0 };
            assert!((dot - expect).abs() < 1e-13, "shift {shift}: {dot}");
        }
        let even: f64 = h.iter().step_by(2).sum();
        let odd: f64 = h.iter().skip(1).step_by(2).sum();
        assert!((even - odd).abs() < 1e-13);
    }

    #[test]
    fn highpass_satisfies_qmf_relation_exactly() {
        let bank = FilterBank::daubechies24();
        let (h, g) = (bank.lowpass(), bank.highpass());
        for n in 0..48 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(g[n], sign * h[47 - n]);
        }
        // Low vanishing moments of the highpass filter; higher ones lose
        // precision to cancellation in double arithmetic.
        for p in 0..4 {
            let m: f64 = g.iter().enumerate().map(|(n, v)| v * (n as f64).powi(p)).sum();
            assert!(m.abs() < 1e-8, "moment {p}: {m}");
        }
    }

    #[test]
    fn reflect_is_whole_point() {
        let idx: Vec<usize> = (-4..9).map(|i| reflect(i, 4)).collect();
        assert_eq!(idx, vec![2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 1, 2]);
        assert_eq!(reflect(-7, 1), 0);
    }

    #[test]
    fn single_level_perfect_reconstruction_odd_and_short() {
        let bank = FilterBank::daubechies24();
        for n in [2usize, 3, 17, 47, 48, 101, 1000] {
            let x = random_vec(n, n as u64);
            let (a, d) = bank.analyze(&x);
            assert_eq!(a.len(), bank.coeff_len(n));
            let y = bank.synthesize(&a, Some(&d), n).unwrap();
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "n {n}: {err}");
        }
    }

    #[test]
    fn multilevel_perfect_reconstruction() {
        let bank = FilterBank::daubechies24();
        let x = random_vec(4096, 7);
        for levels in [1, 5, 11] {
            let c = wavedec(&bank, &x, levels).unwrap();
            let y = waverec(&bank, &c).unwrap();
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "levels {levels}: {err}");
        }
    }

    #[test]
    fn approximation_reproduces_constants() {
        let bank = FilterBank::daubechies24();
        for levels in [5, 7, 9, 10, 11] {
            let x = vec![42.5; 5000];
            let s = approximation(&bank, &x, levels).unwrap();
            assert_eq!(s.len(), x.len());
            assert!(s.iter().all(|v| (v - 42.5).abs() < 1e-8));
        }
    }

    #[test]
    fn approximation_matches_zeroed_waverec() {
        let bank = FilterBank::daubechies24();
        let x = random_vec(3000, 3);
        let mut c = wavedec(&bank, &x, 6).unwrap();
        for d in &mut c.details {
            d.iter_mut().for_each(|v| *v = 0.0);
        }
        let a = waverec(&bank, &c).unwrap();
        let b = approximation(&bank, &x, 6).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-10));
    }

    #[test]
    fn too_short_input_rejected() {
        let bank = FilterBank::daubechies24();
        assert!(matches!(
            approximation(&bank, &[1.0; 31], 5),
            Err(Error::TooShort { needed: 32, got: 31 })
        ));
        assert!(approximation(&bank, &[1.0; 32], 5).is_ok());
    }
}
