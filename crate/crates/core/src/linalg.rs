//! Matrix exponential and `φ₁` for the fragmentation generator, and a Krylov
//! action for grids too large for dense exponentials.
//!
//! The dense path shifts the scaled matrix to `P = N + cI >= 0` (the generator
//! is Metzler), so every Taylor term is nonnegative and `e^N`, `φ₁(N)` come out
//! entrywise nonnegative. Squaring uses `e^{2N} = (e^N)²` and
//! `φ₁(2N) = ½ φ₁(N)(e^N + I)`, which preserve that sign.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};

/// `e^{hA}` together with `φ₁(hA) = ∫_0^1 e^{shA} ds`.
#[derive(Clone, Debug)]
pub struct ExpPhi {
    pub exp: Array2<f64>,
    pub phi1: Array2<f64>,
}

pub fn norm1(a: &Array2<f64>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `g_k(c) = ∫_0^1 s^k e^{-cs} ds` for `0 <= c <= 1`.
fn shifted_phi_coefficient(k: usize, c: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = 1.0;
    for j in 0..40 {
        let term = pow / (k + j + 1) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pow *= -c / (j + 1) as f64;
    }
    sum
}

fn scaled(a: &Array2<f64>, h: f64) -> Result<(Array2<f64>, u32)> {
    if a.nrows() != a.ncols() {
        return Err(Error::precondition(
            "matrix exponential needs a square matrix",
        ));
    }
    if !h.is_finite() || h < 0.0 {
        return Err(Error::precondition(format!(
            "exponential time must be finite and >= 0, got {h}"
        )));
    }
    let norm = norm1(a) * h;
    if !norm.is_finite() {
        return Err(Error::ExpAction("non-finite matrix entries".into()));
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    if squarings > 60 {
        return Err(Error::ExpAction(format!(
            "norm {norm:e} needs too many squarings"
        )));
    }
    let n = a * (h / 2f64.powi(squarings as i32));
    Ok((n, squarings))
}

fn taylor(n: &Array2<f64>, with_phi: bool) -> (Array2<f64>, Option<Array2<f64>>) {
    let dim = n.nrows();
    let c = n.diag().iter().fold(0.0f64, |m, &d| m.max(-d));
    let p = n + &(Array2::<f64>::eye(dim) * c);
    let mut term = Array2::<f64>::eye(dim);
    let mut exp = term.clone();
    let mut phi = with_phi.then(|| term.clone() * shifted_phi_coefficient(0, c));
    for k in 1..=40 {
        term = term.dot(&p) / k as f64;
        exp = exp + &term;
        if let Some(phi) = phi.as_mut() {
            phi.scaled_add(shifted_phi_coefficient(k, c), &term);
        }
        let t = norm1(&term);
        if t <= 1e-18 * norm1(&exp) {
            break;
        }
    }
    exp *= (-c).exp();
    (exp, phi)
}

/// `e^{hA}`.
pub fn expm(a: &Array2<f64>, h: f64) -> Result<Array2<f64>> {
    let (n, squarings) = scaled(a, h)?;
    let (mut e, _) = taylor(&n, false);
    for _ in 0..squarings {
        e = e.dot(&e);
    }
    check_finite(&e)?;
    Ok(e)
}

/// `e^{hA}` and `φ₁(hA)`.
pub fn expm_phi1(a: &Array2<f64>, h: f64) -> Result<ExpPhi> {
    let (n, squarings) = scaled(a, h)?;
    let (mut e, phi) = taylor(&n, true);
    let mut phi = phi.expect("requested");
    let eye = Array2::<f64>::eye(a.nrows());
    for _ in 0..squarings {
        phi = phi.dot(&(&e + &eye)) * 0.5;
        e = e.dot(&e);
    }
    check_finite(&e)?;
    check_finite(&phi)?;
    Ok(ExpPhi { exp: e, phi1: phi })
}

fn check_finite(m: &Array2<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::ExpAction("matrix exponential overflowed".into()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Settings of the Krylov exponential action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    pub dim: usize,
    pub tol: f64,
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            dim: 30,
            tol: 1e-12,
            max_substeps: 10_000,
        }
    }
}

/// `e^{tA} v` by restarted Arnoldi with substep control, for an operator
/// given only through its action.
pub fn krylov_expmv<F>(apply: F, v: &[f64], t: f64, opts: KrylovOptions) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::precondition(format!(
            "exponential time must be finite and >= 0, got {t}"
        )));
    }
    let mut w = v.to_vec();
    let mut done = 0.0;
    let mut tau = t;
    let mut substeps = 0;
    while done < t {
        let beta = norm2(&w);
        if beta == 0.0 {
            break;
        }
        let m = opts.dim.min(w.len()).max(1);
        let mut basis: Vec<Vec<f64>> = vec![w.iter().map(|x| x / beta).collect()];
        let mut h = Array2::<f64>::zeros((m + 1, m));
        let mut used = m;
        let mut happy = false;
        for j in 0..m {
            let mut p = apply(&basis[j]);
            for (i, b) in basis.iter().enumerate() {
                let hij = dot(&p, b);
                h[[i, j]] = hij;
                p.iter_mut().zip(b).for_each(|(pv, bv)| *pv -= hij * bv);
            }
            let hn = norm2(&p);
            h[[j + 1, j]] = hn;
            if hn <= 1e-14 * beta.max(1.0) {
                used = j + 1;
                happy = true;
                break;
            }
            basis.push(p.iter().map(|x| x / hn).collect());
        }
        let hm = h.slice(ndarray::s![..used, ..used]).to_owned();
        let h_next = if happy { 0.0 } else { h[[used, used - 1]] };
        if happy {
            tau = t - done;
        }
        loop {
            substeps += 1;
            if substeps > opts.max_substeps {
                return Err(Error::ExpAction(format!(
                    "Krylov action did not converge within {} substeps",
                    opts.max_substeps
                )));
            }
            let ep = expm_phi1(&hm, tau)?;
            let err = beta * h_next * tau * ep.phi1[[used - 1, 0]].abs();
            if happy || err <= opts.tol * beta * (tau / t).max(1e-3) {
                let coeffs = ep.exp.column(0);
                let mut next = vec![0.0; w.len()];
                for (c, b) in coeffs.iter().zip(&basis) {
                    next.iter_mut()
                        .zip(b)
                        .for_each(|(nv, bv)| *nv += beta * c * bv);
                }
                w = next;
                done += tau;
                tau = (2.0 * tau).min(t - done);
                break;
            }
            tau *= 0.5;
        }
    }
    Ok(w)
}

/// `e^{hA} u + h φ₁(hA) v` through the augmented operator `[[A, v], [0, 0]]`.
pub fn krylov_exp_phi_action<F>(
    apply: F,
    u: &[f64],
    v: &[f64],
    h: f64,
    opts: KrylovOptions,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = u.len();
    let augmented = |z: &[f64]| {
        let mut out = apply(&z[..n]);
        let s = z[n];
        out.iter_mut().zip(v).for_each(|(o, vv)| *o += s * vv);
        out.push(0.0);
        out
    };
    let mut start = u.to_vec();
    start.push(1.0);
    let mut w = krylov_expmv(augmented, &start, h, opts)?;
    w.truncate(n);
    Ok(w)
}

/// Dense `A x`.
pub fn matvec(a: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    a.dot(&Array1::from(x.to_vec())).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn metzler(n: usize, seed: u64, scale: f64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::from_shape_fn((n, n), |_| scale * rng.random::<f64>());
        for i in 0..n {
            a[[i, i]] = -scale * (n as f64) * rng.random::<f64>();
        }
        a
    }

    fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn diagonal_exponential() {
        let a = Array2::from_diag(&Array1::from(vec![-1.0, -2.0, 0.0, -40.0]));
        let ep = expm_phi1(&a, 0.5).unwrap();
        for (i, &d) in [-1.0f64, -2.0, 0.0, -40.0].iter().enumerate() {
            let z = 0.5 * d;
            assert!((ep.exp[[i, i]] - z.exp()).abs() <= 1e-13 * z.exp());
            let phi = if z == 0.0 { 1.0 } else { (z.exp() - 1.0) / z };
            assert!(
                (ep.phi1[[i, i]] - phi).abs() < 1e-14,
                "{} vs {phi}",
                ep.phi1[[i, i]]
            );
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let a = metzler(6, 1, 1.0);
        let ep = expm_phi1(&a, 0.0).unwrap();
        assert_eq!(max_diff(&ep.exp, &Array2::eye(6)), 0.0);
        assert_eq!(max_diff(&ep.phi1, &Array2::eye(6)), 0.0);
    }

    #[test]
    fn nonnegative_and_semigroup() {
        let a = metzler(12, 2, 3.0);
        let e1 = expm(&a, 0.7).unwrap();
        let e2 = expm(&a, 0.3).unwrap();
        let e = expm(&a, 1.0).unwrap();
        assert!(e.iter().all(|&v| v >= 0.0));
        let scale = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_diff(&e1.dot(&e2), &e) <= 1e-12 * scale);
    }

    #[test]
    fn phi1_matches_quadrature_of_exponential() {
        let a = metzler(5, 3, 2.0);
        let h = 0.8;
        let ep = expm_phi1(&a, h).unwrap();
        // composite Simpson on s ↦ e^{shA}
        let k = 200;
        let mut acc = Array2::<f64>::zeros((5, 5));
        for j in 0..=k {
            let s = j as f64 / k as f64;
            let w = if j == 0 || j == k {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc = acc + expm(&a, s * h).unwrap() * w;
        }
        acc /= 3.0 * k as f64;
        assert!(
            max_diff(&acc, &ep.phi1) < 1e-9,
            "{}",
            max_diff(&acc, &ep.phi1)
        );
        assert!(ep.phi1.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn krylov_matches_dense() {
        let a = metzler(80, 4, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: Vec<f64> = (0..80).map(|_| rng.random()).collect();
        let dense = matvec(&expm(&a, 0.4).unwrap(), &v);
        let kry = krylov_expmv(|x| matvec(&a, x), &v, 0.4, KrylovOptions::default()).unwrap();
        let scale = norm2(&dense);
        let diff: Vec<f64> = dense.iter().zip(&kry).map(|(x, y)| x - y).collect();
        assert!(norm2(&diff) <= 1e-10 * scale, "{}", norm2(&diff) / scale);
    }

    #[test]
    fn krylov_phi_action_matches_dense() {
        let a = metzler(60, 5, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u: Vec<f64> = (0..60).map(|_| rng.random()).collect();
        let v: Vec<f64> = (0..60).map(|_| rng.random()).collect();
        let h = 0.05;
        let ep = expm_phi1(&a, h).unwrap();
        let eu = matvec(&ep.exp, &u);
        let pv = matvec(&ep.phi1, &v);
        let dense: Vec<f64> = eu.iter().zip(&pv).map(|(x, y)| x + h * y).collect();
        let kry =
            krylov_exp_phi_action(|x| matvec(&a, x), &u, &v, h, KrylovOptions::default()).unwrap();
        let diff: Vec<f64> = dense.iter().zip(&kry).map(|(x, y)| x - y).collect();
        assert!(norm2(&diff) <= 1e-10 * norm2(&dense));
    }
}
