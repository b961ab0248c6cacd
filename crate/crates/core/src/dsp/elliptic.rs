//! Elliptic (Cauer) analog prototype.
//!
//! Jacobi elliptic functions are evaluated with descending Landen
//! transformations, which work for complex arguments without special-casing
//! and converge in a handful of steps for the moduli used here. Arguments
//! are normalised: `u` is in units of the quarter period K.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Zeros, poles and gain of an analog low-pass prototype with its passband
/// edge at 1 rad/s.
#[derive(Debug, Clone)]
pub struct AnalogPrototype {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub gain: f64,
    /// Stopband edge (rad/s) at which the attenuation first reaches the
    /// design value.
    pub stopband_edge: f64,
}

fn landen(k: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut k = k;
    while k > 1e-16 && v.len() < 40 {
        let kp = ((1.0 - k) * (1.0 + k)).sqrt();
        k = (k / (1.0 + kp)).powi(2);
        v.push(k);
    }
    v
}

/// cd(uK, k)
fn cde(u: Complex64, k: f64) -> Complex64 {
    let mut w = (u * (PI / 2.0)).cos();
    for &vn in landen(k).iter().rev() {
        w = (1.0 + vn) * w / (1.0 + vn * w * w);
    }
    w
}

/// sn(uK, k)
fn sne(u: Complex64, k: f64) -> Complex64 {
    let mut w = (u * (PI / 2.0)).sin();
    for &vn in landen(k).iter().rev() {
        w = (1.0 + vn) * w / (1.0 + vn * w * w);
    }
    w
}

/// Inverse of `cde`, reduced to the fundamental period rectangle.
fn acde(w: Complex64, k: f64) -> Complex64 {
    let v = landen(k);
    let mut w = w;
    for (n, &vn) in v.iter().enumerate() {
        let prev = if n == 0 { k } else { v[n - 1] };
        w = w / (1.0 + (1.0 - w * w * prev * prev).sqrt()) * 2.0 / (1.0 + vn);
    }
    let u = w.acos() * (2.0 / PI);
    let r = ellipk(((1.0 - k) * (1.0 + k)).sqrt()) / ellipk(k);
    Complex64::new(srem(u.re, 4.0), srem(u.im, 2.0 * r))
}

/// Inverse of `sne`.
fn asne(w: Complex64, k: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) - acde(w, k)
}

fn srem(x: f64, y: f64) -> f64 {
    let z = x % y;
    if z.abs() > y / 2.0 {
        z - y * z.signum()
    } else {
        z
    }
}

/// Complete elliptic integral of the first kind K(k) via the AGM.
pub fn ellipk(k: f64) -> f64 {
    let mut a = 1.0;
    let mut b = ((1.0 - k) * (1.0 + k)).sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

/// Nome q = exp(-pi K'/K).
fn nome(k: f64) -> f64 {
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    (-PI * ellipk(kp) / ellipk(k)).exp()
}

/// Modulus from nome via theta functions: k = (theta2 / theta3)^2.
fn modulus_from_nome(q: f64) -> f64 {
    let mut t2 = 0.0;
    let mut t3 = 1.0;
    for n in 0..40 {
        let n = n as f64;
        t2 += q.powf(n * (n + 1.0));
        if n > 0.0 {
            t3 += 2.0 * q.powf(n * n);
        }
    }
    t2 *= 2.0 * q.powf(0.25);
    (t2 / t3).powi(2)
}

/// Selectivity k solving the degree equation N K'(k1)/K(k1) = K'(k)/K(k).
pub fn solve_degree_equation(order: usize, k1: f64) -> f64 {
    let q1 = nome(k1);
    modulus_from_nome(q1.powf(1.0 / order as f64))
}

/// Elliptic low-pass prototype of `order` with `ripple_db` passband ripple
/// and `atten_db` minimum stopband attenuation.
///
/// For even orders the DC gain is -ripple dB, for odd orders 0 dB.
pub fn prototype(order: usize, ripple_db: f64, atten_db: f64) -> AnalogPrototype {
    let eps = (10f64.powf(ripple_db / 10.0) - 1.0).sqrt();
    let k1 = eps / (10f64.powf(atten_db / 10.0) - 1.0).sqrt();
    let k = solve_degree_equation(order, k1);
    let half = order / 2;
    let odd = order % 2 == 1;
    let j = Complex64::i();

    let mut zeros = Vec::with_capacity(2 * half);
    let mut poles = Vec::with_capacity(order);
    let v0 = -j * asne(j / eps, k1) / order as f64;
    for i in 1..=half {
        let u = Complex64::new((2 * i - 1) as f64 / order as f64, 0.0);
        let zeta = cde(u, k);
        let z = j / (zeta * k);
        zeros.push(z);
        zeros.push(z.conj());
        let p = j * cde(u - j * v0, k);
        poles.push(p);
        poles.push(p.conj());
    }
    if odd {
        let p0 = j * sne(j * v0, k);
        poles.push(Complex64::new(p0.re, 0.0));
    }

    let dc = if odd { 1.0 } else { 10f64.powf(-ripple_db / 20.0) };
    let num: Complex64 = zeros.iter().map(|z| -z).product();
    let den: Complex64 = poles.iter().map(|p| -p).product();
    let gain = dc * (den / num).re;

    AnalogPrototype {
        zeros,
        poles,
        gain,
        stopband_edge: 1.0 / k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn response_db(p: &AnalogPrototype, w: f64) -> f64 {
        let s = Complex64::new(0.0, w);
        let num: Complex64 = p.zeros.iter().map(|z| s - z).product();
        let den: Complex64 = p.poles.iter().map(|q| s - q).product();
        20.0 * (p.gain * num / den).norm().log10()
    }

    #[test]
    fn ellipk_known_values() {
        assert!((ellipk(0.0) - PI / 2.0).abs() < 1e-15);
        // K(1/sqrt 2) = Gamma(1/4)^2 / (4 sqrt(pi))
        assert!((ellipk(0.5f64.sqrt()) - 1.854_074_677_301_372).abs() < 1e-13);
    }

    #[test]
    fn jacobi_identities() {
        let k = 0.7;
        for &u in &[0.1, 0.37, 0.8] {
            let u = Complex64::new(u, 0.0);
            let sn = sne(u, k);
            // cd(uK) = sn((1 - u)K)
            let cd = cde(Complex64::new(1.0, 0.0) - u, k);
            assert!((sn - cd).norm() < 1e-14);
            assert!((asne(sn, k) - u).norm() < 1e-12);
        }
    }

    #[test]
    fn degree_equation_round_trip() {
        let k = 0.6;
        let q = nome(k);
        assert!((modulus_from_nome(q) - k).abs() < 1e-14);
    }

    #[test]
    fn prototype_meets_ripple_and_attenuation() {
        for (n, rp, rs) in [(4usize, 1.0, 40.0), (3, 0.5, 30.0), (5, 0.1, 60.0)] {
            let p = prototype(n, rp, rs);
            assert_eq!(p.poles.len(), n);
            assert!(p.poles.iter().all(|q| q.re < 0.0));
            for i in 0..=1000 {
                let w = i as f64 / 1000.0;
                let g = response_db(&p, w);
                assert!(g <= 1e-9 && g >= -rp - 1e-9, "order {n} w {w} gain {g}");
            }
            assert!((response_db(&p, 1.0) + rp).abs() < 1e-9);
            for i in 0..=2000 {
                let w = p.stopband_edge * (1.0 + i as f64 * 0.01);
                let g = response_db(&p, w);
                assert!(g <= -rs + 1e-7, "order {n} w {w} gain {g}");
            }
            assert!((response_db(&p, p.stopband_edge) + rs).abs() < 1e-7);
        }
    }
}
