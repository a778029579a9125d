//! FFT-based spectra from sampled traces.

use rustfft::FftPlanner;
use spinlab_core::C64;

pub fn fft(signal: &[C64]) -> Vec<C64> {
    let mut buf = signal.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Multiplier that turns a delta line into a Gaussian of full width at half
/// maximum `fwhm` (Hz). `fwhm = 0` gives a flat window.
pub fn gaussian_window(n: usize, dt: f64, fwhm: f64) -> Vec<f64> {
    if fwhm <= 0.0 {
        return vec![1.0; n];
    }
    let sigma_t = (8.0 * std::f64::consts::LN_2).sqrt() / (2.0 * std::f64::consts::PI * fwhm);
    (0..n).map(|k| (-0.5 * (k as f64 * dt / sigma_t).powi(2)).exp()).collect()
}

/// Centered frequency axis (Hz) for `n` samples at spacing `dt`.
pub fn centered_frequencies(n: usize, dt: f64) -> Vec<f64> {
    let half = (n / 2) as isize;
    (0..n as isize).map(|k| (k - half) as f64 / (n as f64 * dt)).collect()
}

/// Absorption spectrum of a complex free-induction decay.
///
/// The first sample is halved, the decay apodized with
/// [`gaussian_window`] and transformed. A component `exp(+2πi f t)` lands
/// at `+f`. Returns the centered frequency axis and the real part.
pub fn fid_spectrum(fid: &[C64], dt: f64, fwhm: f64) -> (Vec<f64>, Vec<f64>) {
    let n = fid.len();
    let w = gaussian_window(n, dt, fwhm);
    let mut x: Vec<C64> = fid.iter().zip(&w).map(|(s, w)| s * w).collect();
    if let Some(first) = x.first_mut() {
        *first *= 0.5;
    }
    let spec = fft(&x);
    let half = n / 2;
    let re = (0..n).map(|k| spec[(k + n - half) % n].re).collect();
    (centered_frequencies(n, dt), re)
}

/// One-sided magnitude spectrum of a real trace sampled every `ts` seconds,
/// after removing its mean. Frequencies `k / (n ts)` for `k = 0..=n/2`.
pub fn magnitude_spectrum(signal: &[f64], ts: f64) -> (Vec<f64>, Vec<f64>) {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let x: Vec<C64> = signal.iter().map(|s| C64::new(s - mean, 0.0)).collect();
    let spec = fft(&x);
    let freqs = (0..=n / 2).map(|k| k as f64 / (n as f64 * ts)).collect();
    let mags = spec[..=n / 2].iter().map(|z| z.norm()).collect();
    (freqs, mags)
}

/// `Σ f² I(f) / Σ I(f)` about zero frequency.
pub fn second_moment(freqs: &[f64], intensity: &[f64]) -> f64 {
    let total: f64 = intensity.iter().sum();
    freqs.iter().zip(intensity).map(|(f, i)| f * f * i).sum::<f64>() / total
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_rotation_lands_at_positive_frequency() {
        let dt = 1e-3;
        let f0 = 62.5;
        let fid: Vec<C64> = (0..256).map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * f0 * k as f64 * dt)).collect();
        let (f, s) = fid_spectrum(&fid, dt, 10.0);
        let k = argmax(&s);
        assert!((f[k] - f0).abs() < 0.5 / (256.0 * dt));
    }

    #[test]
    fn gaussian_line_width() {
        let dt = 1e-4;
        let fid = vec![C64::new(1.0, 0.0); 4096];
        let (f, s) = fid_spectrum(&fid, dt, 20.0);
        let peak = s[argmax(&s)];
        let above: Vec<f64> = f.iter().zip(&s).filter(|(_, v)| **v > 0.5 * peak).map(|(f, _)| *f).collect();
        let width = above.last().unwrap() - above.first().unwrap();
        assert!((width - 20.0).abs() < 2.0 * (f[1] - f[0]), "{width}");
        // var of a Gaussian line is (fwhm/2.3548)²
        let m2 = second_moment(&f, &s);
        let sigma = 20.0 / (8.0 * std::f64::consts::LN_2).sqrt();
        assert!((m2 / (sigma * sigma) - 1.0).abs() < 0.05, "{m2}");
    }

    #[test]
    fn magnitude_of_cosine() {
        let n = 200;
        let ts = 0.01;
        let sig: Vec<f64> = (0..n).map(|k| 3.0 + (2.0 * std::f64::consts::PI * 10.0 * k as f64 * ts).cos()).collect();
        let (f, m) = magnitude_spectrum(&sig, ts);
        assert_eq!(f.len(), 101);
        assert_eq!(argmax(&m), 20);
        assert!(m[0].abs() < 1e-9);
    }
}
