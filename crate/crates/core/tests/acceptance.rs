//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#![allow(clippy::needless_range_loop)]

mod common;

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use common::*;
use qregister::encoding::{
    covariance_2d, function_mps, gaussian_mps_nd, reorder, sample_1d, verify_entropy_bounds,
    Distribution, GaussianOptions, Representation, Scheme,
};
use qregister::mpo::{self, Derivative, FourierSign, ShiftDirection};
use qregister::pde::{
    evolve_fd, evolve_split_step_traced, Checkpoints, FdOptions, FokkerPlanckSpec, Observables,
};
use qregister::spectral::{
    fourier_interpolate, linear_interpolate, qft, twos_complement, SpectralOptions,
};
use qregister::{
    simplify, Axis, Grid, IsingForm, Mps, QubitOrder, QuboForm, SimplifyOptions, SvdTruncation, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_entropy(p: &Mps) -> f64 {
    p.entropy_profile().into_iter().fold(0.0, f64::max)
}

fn trunc(tol: f64) -> SvdTruncation {
    SvdTruncation::new(tol, None).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut note = |d: f64| worst = worst.max(d);
    for n in 1..=10 {
        let ax = Axis::new(-3.0, 5.0, n).unwrap();
        let dx = ax.spacing();
        let x = |s: usize| ax.x(s);
        let k = C64::new(0.7, -0.4);
        note(mpo_deviation(
            &mpo::shift(n, ShiftDirection::Up).unwrap(),
            &shift_up(n),
        ));
        note(mpo_deviation(
            &mpo::shift(n, ShiftDirection::Down).unwrap(),
            &shift_down(n),
        ));
        let tri = add(
            &add(&identity(n), &shift_up(n), k, c(2.0)),
            &shift_down(n),
            c(1.0),
            c(-0.5),
        );
        note(mpo_deviation(
            &mpo::tridiagonal(n, k, c(2.0), c(-0.5)).unwrap(),
            &tri,
        ));
        note(mpo_deviation(
            &mpo::position(&ax, k).unwrap(),
            &diagonal(n, |s| k * x(s)),
        ));
        note(mpo_deviation(
            &mpo::position_squared(&ax, k).unwrap(),
            &diagonal(n, |s| k * x(s) * x(s)),
        ));
        note(mpo_deviation(
            &mpo::exp_linear(&ax, k * 0.1).unwrap(),
            &diagonal(n, |s| (k * 0.1 * x(s)).exp()),
        ));
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lin = |s: usize| 0.3 + (0..n).map(|i| w[i] * bit(s, i, n) as f64).sum::<f64>();
        note(mpo_deviation(
            &mpo::diagonal_linear(&w, 0.3, k).unwrap(),
            &diagonal(n, |s| k * lin(s)),
        ));
        let quad = diagonal(n, |s| k * lin(s) + c(0.5) * lin(s) * lin(s));
        note(mpo_deviation(
            &mpo::diagonal_quadratic(&w, 0.3, k, c(0.5)).unwrap(),
            &quad,
        ));
        note(mpo_deviation(
            &mpo::diagonal_exp(&w, 0.3, k).unwrap(),
            &diagonal(n, |s| (k * lin(s)).exp()),
        ));
        let kk = |s: usize| 2.0 * std::f64::consts::PI / ax.length() * twos(s, n) as f64;
        note(mpo_deviation(
            &mpo::momentum(&ax, 1).unwrap(),
            &diagonal(n, |s| c(kk(s))),
        ));
        note(mpo_deviation(
            &mpo::momentum(&ax, 2).unwrap(),
            &diagonal(n, |s| c(kk(s) * kk(s))),
        ));
        let first = add(&shift_down(n), &shift_up(n), c(0.5 / dx), c(-0.5 / dx));
        note(mpo_deviation(
            &mpo::finite_difference(&ax, Derivative::First).unwrap(),
            &first,
        ));
        let lap = add(
            &add(&shift_down(n), &shift_up(n), c(1.0), c(1.0)),
            &identity(n),
            c(1.0 / (dx * dx)),
            c(-2.0 / (dx * dx)),
        );
        note(mpo_deviation(
            &mpo::finite_difference(&ax, Derivative::Second).unwrap(),
            &lap,
        ));
        let mut tc = zeros(n);
        for s in 0..1usize << n {
            let top = bit(s, 0, n);
            let t = (0..n).fold(0, |acc, k| {
                (acc << 1) | if k == 0 { top } else { bit(s, k, n) ^ top }
            });
            tc[t][s] = c(1.0);
        }
        note(mpo_deviation(&mpo::twos_complement(n).unwrap(), &tc));

        if n <= 8 {
            let mut q = vec![vec![0.0; n]; n];
            let mut j = vec![vec![0.0; n]; n];
            for a in 0..n {
                for b in 0..=a {
                    let v = rng.gen_range(-1.0..1.0);
                    q[a][b] = v;
                    q[b][a] = v;
                    if a != b {
                        j[a][b] = -v;
                        j[b][a] = -v;
                    }
                }
            }
            let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let scale = C64::new(-0.2, 0.1);
            let qubo =
                mpo::qubo_exponential_layers(&QuboForm::new(q.clone(), scale).unwrap()).unwrap();
            let want = diagonal(n, |s| {
                let e: f64 = (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .map(|(a, b)| q[a][b] * (bit(s, a, n) * bit(s, b, n)) as f64)
                    .sum();
                (scale * e).exp()
            });
            note(dense_deviation(&dense_product(&qubo), &want));
            let ising = mpo::ising_exponential_layers(
                &IsingForm::new(h.clone(), j.clone(), scale).unwrap(),
            )
            .unwrap();
            let want = diagonal(n, |s| {
                let z: Vec<f64> = (0..n).map(|i| 2.0 * bit(s, i, n) as f64 - 1.0).collect();
                let e: f64 = (0..n).map(|i| h[i] * z[i]).sum::<f64>()
                    + (0..n)
                        .flat_map(|a| (0..n).map(move |b| (a, b)))
                        .filter(|(a, b)| a != b)
                        .map(|(a, b)| j[a][b] * z[a] * z[b])
                        .sum::<f64>();
                (scale * e).exp()
            });
            note(dense_deviation(&dense_product(&ising), &want));
        }

        let opts = SpectralOptions::with_truncation(SvdTruncation::exact());
        let p = random_mps(n, 6, &mut rng);
        let v = p.to_dense().unwrap();
        let f = qft(&p, FourierSign::Forward, &opts).unwrap();
        note(vec_deviation(&f.to_dense().unwrap(), &dft(&v, -1.0)));
        note(vec_deviation(
            &qft(&p, FourierSign::Inverse, &opts)
                .unwrap()
                .to_dense()
                .unwrap(),
            &dft(&v, 1.0),
        ));
        note(vec_deviation(
            &twos_complement(&f, &opts).unwrap().to_dense().unwrap(),
            &matvec(&tc, &dft(&v, -1.0)),
        ));

        let dense = random_vector(1 << n, &mut rng);
        note(vec_deviation(
            &Mps::from_dense(&dense, &SvdTruncation::exact())
                .unwrap()
                .to_dense()
                .unwrap(),
            &dense,
        ));
        note(vec_deviation(
            &Mps::from_dense(&v, &SvdTruncation::exact())
                .unwrap()
                .to_dense()
                .unwrap(),
            &v,
        ));
    }
    outcome(
        worst < 1e-11,
        format!("max deviation from dense oracles {worst:.2e} (tol 1e-11, n = 1..10)"),
    )
}

fn studied() -> [Distribution; 4] {
    [
        Distribution::gaussian(1.0, 0.0).unwrap(),
        Distribution::log_normal(1.0, 1.0).unwrap(),
        Distribution::lorentzian(1.0, 0.0).unwrap(),
        Distribution::non_convex(1.0).unwrap(),
    ]
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in &studied()[..3] {
        let (a, b) = d.default_interval();
        let p = sample_1d(
            (*d).into(),
            &Axis::new(a, b, 14).unwrap(),
            Scheme::GrIntegral,
            Representation::Sqrt,
            &trunc(1e-14),
        )
        .unwrap();
        let s = max_entropy(&p);
        let gamma = verify_entropy_bounds(d, (a, b), 6..=13)
            .unwrap()
            .decay_exponent()
            .unwrap_or(f64::NAN);
        pass &= s < 1.0 && (1.5..=2.0).contains(&gamma);
        parts.push(format!("{} S={s:.4} gamma={gamma:.3}", d.name()));
    }
    outcome(
        pass,
        format!("{} (need S < 1, gamma in [1.5, 2])", parts.join(", ")),
    )
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut rows = 0;
    for d in studied() {
        let r = verify_entropy_bounds(&d, d.default_interval(), 2..=14).unwrap();
        rows += r.rows.len();
        pass &= r.all_hold();
    }
    outcome(
        pass,
        format!("entropy and purity bounds at {rows} (distribution, m) pairs, m = 2..14"),
    )
}

fn criterion_4() -> Outcome {
    let axis = Axis::new(-7.0, 7.0, 14).unwrap();
    let sigma = covariance_2d(1.0, 0.1, FRAC_PI_4).unwrap();
    let grid_b = Grid::new(vec![axis; 2], QubitOrder::B).unwrap();
    let grid_a = grid_b.with_order(QubitOrder::A).unwrap();
    let simplify = SimplifyOptions::with_truncation(trunc(1e-10));
    let opts = GaussianOptions {
        steps: 8,
        representation: Representation::Sqrt,
        simplify,
        ..Default::default()
    };
    let b = gaussian_mps_nd(&sigma, &grid_b, &opts).unwrap();
    let a = reorder(
        &b,
        &grid_b.ordering_map(),
        &grid_a.ordering_map(),
        &simplify.truncation,
    )
    .unwrap()
    .normalized();
    let (sb, sa, params) = (max_entropy(&b), max_entropy(&a), b.parameter_count());
    outcome(
        sb <= 2.2 && params < 100_000 && sa > sb,
        format!("order B S={sb:.3} params={params}, order A S={sa:.3} (need S_B <= 2.2, params < 1e5, S_A > S_B)"),
    )
}

fn criterion_5() -> Outcome {
    let d = Distribution::gaussian(1.0, 0.0).unwrap();
    let (a, b) = d.default_interval();
    let opts = SpectralOptions::with_truncation(trunc(1e-10));
    let p = sample_1d(
        d.into(),
        &Axis::new(a, b, 15).unwrap(),
        Scheme::GrIntegral,
        Representation::Sqrt,
        &opts.truncation(),
    )
    .unwrap();
    let f = qft(&p, FourierSign::Forward, &opts).unwrap();
    let folded = twos_complement(&f, &opts).unwrap();
    let (sf, sc) = (max_entropy(&f), max_entropy(&folded));
    outcome(
        sc < sf && sc < 0.5,
        format!("S(F p)={sf:.4}, S(U2c F p)={sc:.4} (need below both and 0.5)"),
    )
}

fn criterion_6() -> Outcome {
    let gauss = |ax: &Axis| function_mps(&|x| c((-x * x / 2.0).exp()), ax, &trunc(1e-10)).unwrap();
    let coarse = Axis::new(-8.0, 8.0, 5).unwrap();
    let fine = coarse.with_qubits(10).unwrap();
    let opts = SpectralOptions::with_truncation(trunc(1e-10));
    let p = gauss(&coarse);
    let direct = gauss(&fine).to_dense().unwrap();
    let fourier = fourier_interpolate(&p, 5, &opts)
        .unwrap()
        .to_dense()
        .unwrap();
    let mut lin = p;
    for _ in 0..5 {
        lin = linear_interpolate(&lin, &opts).unwrap();
    }
    let linear = lin.to_dense().unwrap();
    let peak = direct.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = |v: &[C64]| {
        v.iter()
            .zip(&direct)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
            / peak
    };
    let (ef, el) = (err(&fourier), err(&linear));
    outcome(
        ef < 1e-3 && el >= 10.0 * ef,
        format!("relative error fourier {ef:.2e}, linear {el:.2e} (need < 1e-3 and 10x gap)"),
    )
}

fn fd_spec(dt: f64) -> FokkerPlanckSpec {
    FokkerPlanckSpec::new(0.2, 0.1, Axis::new(-10.0, 10.0, 10).unwrap(), dt, 2.0).unwrap()
}

fn fd_init(axis: &Axis) -> Mps {
    let d = Distribution::gaussian(1.0, 0.0).unwrap();
    sample_1d(
        d.into(),
        axis,
        Scheme::Riemann,
        Representation::Amplitude,
        &trunc(1e-24),
    )
    .unwrap()
}

/// Dense `exp(t G) p0` for the same central-difference generator, by many small RK4 steps.
fn semi_discrete_reference(spec: &FokkerPlanckSpec, p0: &[f64], t: f64) -> Vec<f64> {
    let dx = spec.axis.spacing();
    let (drift, diff) = (spec.mu / (2.0 * dx), spec.d / (dx * dx));
    let g = |p: &[f64]| -> Vec<f64> {
        let n = p.len();
        (0..n)
            .map(|s| {
                let left = if s > 0 { p[s - 1] } else { 0.0 };
                let right = if s + 1 < n { p[s + 1] } else { 0.0 };
                diff * (left + right - 2.0 * p[s]) - drift * (right - left)
            })
            .collect()
    };
    let steps = 10_000;
    let h = t / steps as f64;
    let mut p = p0.to_vec();
    let axpy = |a: &[f64], k: &[f64], f: f64| -> Vec<f64> {
        a.iter().zip(k).map(|(x, y)| x + f * y).collect()
    };
    for _ in 0..steps {
        let k1 = g(&p);
        let k2 = g(&axpy(&p, &k1, h / 2.0));
        let k3 = g(&axpy(&p, &k2, h / 2.0));
        let k4 = g(&axpy(&p, &k3, h));
        for i in 0..p.len() {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    p
}

fn unit_mass(v: &[f64]) -> Vec<f64> {
    let m: f64 = v.iter().sum();
    v.iter().map(|x| x / m).collect()
}

fn criterion_7() -> Outcome {
    let spec = fd_spec(0.01);
    let init = fd_init(&spec.axis);
    let p0: Vec<f64> = init.to_dense().unwrap().iter().map(|z| z.re).collect();
    let reference = unit_mass(&semi_discrete_reference(&spec, &p0, 2.0));
    let mut worst_moment: f64 = 0.0;
    let mut errors = Vec::new();
    for (dt, every) in [(0.01, 10), (0.005, 20)] {
        let spec = fd_spec(dt);
        let rec = evolve_fd(
            &spec,
            &init,
            Checkpoints {
                every,
                keep_states: true,
            },
            &FdOptions::default(),
        )
        .unwrap();
        for i in 0..rec.len() {
            let t = rec.times[i];
            let mean_err = (rec.mean[i] - spec.mu * t).abs() / (spec.mu * t).max(1e-300);
            let var_err =
                (rec.variance[i] - (1.0 + 2.0 * spec.d * t)).abs() / (1.0 + 2.0 * spec.d * t);
            worst_moment = worst_moment.max(var_err);
            if t > 0.0 {
                worst_moment = worst_moment.max(mean_err);
            } else {
                worst_moment = worst_moment.max(rec.mean[i].abs());
            }
        }
        let last = rec.state_checkpoints.as_ref().unwrap().last().unwrap();
        let got = unit_mass(
            &last
                .to_dense()
                .unwrap()
                .iter()
                .map(|z| z.re)
                .collect::<Vec<_>>(),
        );
        let num: f64 = got
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let den: f64 = reference.iter().map(|b| b * b).sum::<f64>().sqrt();
        errors.push(num / den);
    }
    let ratio = errors[0] / errors[1];
    outcome(
        worst_moment < 0.02 && (3.5..=4.5).contains(&ratio),
        format!(
            "worst moment deviation {worst_moment:.2e} (tol 2%), state error {:.2e} -> {:.2e} on halving dt, ratio {ratio:.2} (need 3.5..4.5)",
            errors[0], errors[1]
        ),
    )
}

fn criterion_8() -> Outcome {
    let spec =
        FokkerPlanckSpec::new(0.5, 0.1, Axis::new(-10.0, 10.0, 14).unwrap(), 3.0, 3.0).unwrap();
    let init = fd_init(&spec.axis);
    let opts = SpectralOptions::with_truncation(trunc(1e-24));
    let (p3, b3) = evolve_split_step_traced(&spec, &init, 3.0, &opts).unwrap();
    let var = Observables::new(&spec.axis)
        .unwrap()
        .measure(&p3)
        .unwrap()
        .variance;
    let var_err = (var - 1.6).abs() / 1.6;
    let (p2, b2) = evolve_split_step_traced(&spec, &init, 1.8, &opts).unwrap();
    let (p12, b12) = evolve_split_step_traced(&spec, &p2, 1.2, &opts).unwrap();
    let (x, y) = (p12.to_dense().unwrap(), p3.to_dense().unwrap());
    let semigroup = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / y.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    let bond = b3.max(b2).max(b12);
    outcome(
        var_err < 1e-4 && semigroup < 1e-8 && bond <= 16,
        format!("variance {var:.10} (rel err {var_err:.1e}), semigroup deviation {semigroup:.1e}, max bond {bond}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = 0;
    let mut worst_rise: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(4..=10);
        let chi = rng.gen_range(4..=12);
        let rank = rng.gen_range(1..chi);
        let p = random_mps(n, chi, &mut rng);
        let opts =
            SimplifyOptions::new(SvdTruncation::new(0.0, Some(rank)).unwrap(), 6, 0.0).unwrap();
        let fit = simplify(&p, &opts).unwrap();
        let rise = fit
            .history
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);
        worst_rise = worst_rise.max(rise);
        let tails: Vec<f64> = p
            .spectra()
            .iter()
            .map(|w| w.iter().skip(rank).sum())
            .collect();
        let lower = tails.iter().cloned().fold(0.0, f64::max).sqrt();
        let upper = tails.iter().sum::<f64>().sqrt();
        let consistent =
            fit.error >= lower * (1.0 - 1e-8) - 1e-12 && fit.error <= upper * (1.0 + 1e-8) + 1e-12;
        if rise > 1e-12 || !consistent || fit.state.max_bond() > rank {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures}/200 instances violate descent or the discarded-weight bracket (largest rise {worst_rise:.1e})"),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let results: Vec<(usize, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(k, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let out = std::panic::catch_unwind(f).unwrap_or_else(|e| {
                        let msg = e
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                        outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
                    });
                    (k, out, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (k, out, secs) in &results {
        println!(
            "{} criterion {k}: {} [{secs:.1}s]",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
        failed += usize::from(!out.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
