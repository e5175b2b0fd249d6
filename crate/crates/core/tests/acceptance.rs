//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use kdlab::circle::{
    circle_is_classical, circle_kd_eval, circle_negativity_search, geometric_purity_limit, random_band_state,
    BandLimitedOperator,
};
use kdlab::classify::{enumerate_kd_positive_pure, recognize_in};
use kdlab::fragment::{
    find_conv_gap_witness, is_kd_positive_state, is_kd_real, kd_real_dimension, HermitianOperator, PureFamily,
};
use kdlab::kd::{akd, char_fn, kd, kd_inverse, marginals, symplectic_fourier, wigner, CharOrder};
use kdlab::random::{random_hermitian, random_operator, random_pure_vector, random_state, rng};
use kdlab::weyl_heisenberg::{wh_conjugate, WHElement};
use kdlab::{parse_group, Error, FiniteAbelianGroup, Operator, PhaseSpaceFunction};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

const BATTERY: [&str; 11] = ["Z2", "Z3", "Z4", "Z2xZ2", "Z6", "Z8", "Z9", "Z2xZ4", "Z3xZ3", "Z12", "Z2xZ2xZ2"];

fn battery() -> Vec<FiniteAbelianGroup> {
    BATTERY.iter().map(|s| parse_group(s).expect("battery group")).collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn kd_unitarity() -> Outcome {
    let rows: Vec<(f64, f64)> = battery()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut r = rng(1, i as u64);
            let mut inner = 0.0f64;
            let mut round = 0.0f64;
            for _ in 0..1000 {
                let a = random_operator(g, &mut r);
                let b = random_operator(g, &mut r);
                let (ka, kb) = (kd(&a), kd(&b));
                inner = inner.max((a.hs_inner(&b) - ka.inner(&kb)).norm());
                round = round.max(kd_inverse(&ka).sub(&a).hs_norm());
            }
            (inner, round)
        })
        .collect();
    let inner = max_of(rows.iter().map(|r| r.0));
    let round = max_of(rows.iter().map(|r| r.1));
    outcome(inner <= 1e-10 && round <= 1e-10, format!("inner product {inner:.2e}, round trip {round:.2e}"))
}

fn oconnell() -> Outcome {
    let rows: Vec<(f64, f64)> = battery()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut r = rng(2, i as u64);
            let mut oc = 0.0f64;
            let mut anti = 0.0f64;
            for _ in 0..1000 {
                let a = random_operator(g, &mut r);
                let x1 = char_fn(&a, CharOrder::Standard1).expect("standard order");
                oc = oc.max(kd(&a).max_abs_diff(&symplectic_fourier(&x1)));
                anti = anti.max(akd(&a).max_abs_diff(&kd(&a.adjoint()).conj()));
            }
            (oc, anti)
        })
        .collect();
    let oc = max_of(rows.iter().map(|r| r.0));
    let anti = max_of(rows.iter().map(|r| r.1));
    outcome(oc <= 1e-10 && anti <= 1e-10, format!("kd vs F(X1) {oc:.2e}, anti-KD {anti:.2e}"))
}

fn born() -> Outcome {
    let rows: Vec<(f64, f64)> = battery()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let n = g.order();
            let nf = n as f64;
            let mut r = rng(3, i as u64);
            let mut marg = 0.0f64;
            let mut mass = 0.0f64;
            for s in 0..100 {
                let rho = random_state(g, 1 + s % n, &mut r);
                let m = marginals(&rho, 1e-10).expect("state");
                for x in 0..n {
                    marg = marg.max((m.position[x] - rho.kernel[(x, x)].re).abs());
                }
                for c in 0..n {
                    let mut p = Complex64::new(0.0, 0.0);
                    for x in 0..n {
                        for y in 0..n {
                            p += g.pair_idx(c, x).conj() * rho.kernel[(x, y)] * g.pair_idx(c, y);
                        }
                    }
                    marg = marg.max((m.momentum[c] - p.re / (nf * nf)).abs());
                }
                mass = mass.max((kd(&rho).total_mass() - 1.0).norm());
            }
            (marg, mass)
        })
        .collect();
    let marg = max_of(rows.iter().map(|r| r.0));
    let mass = max_of(rows.iter().map(|r| r.1));
    outcome(marg <= 1e-10 && mass <= 1e-10, format!("marginals {marg:.2e}, total mass {mass:.2e}"))
}

fn kd_positive(psi_op: &Operator, tol: f64) -> bool {
    let t = kd(psi_op);
    t.max_abs_imag() <= tol && t.min_real() >= -tol
}

fn classification() -> Outcome {
    let expected = [("Z2", 4), ("Z4", 12), ("Z2xZ2", 20), ("Z6", 24)];
    let mut sizes_ok = true;
    for (name, size) in expected {
        let fam = enumerate_kd_positive_pure(&parse_group(name).unwrap()).unwrap();
        sizes_ok &= fam.len() == size;
    }
    let rows: Vec<(bool, f64, usize, usize)> = battery()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let fam = enumerate_kd_positive_pure(g).unwrap();
            let subgroups = g.enumerate_subgroups().unwrap().len();
            let size_ok = fam.len() == g.order() * subgroups;
            let indicator = max_of(fam.iter().map(|m| kd(&m.projector()).max_abs_diff(&m.kd_indicator())));
            let mut r = rng(4, i as u64);
            let mut unrecognized = 0;
            for _ in 0..10_000 {
                let psi = random_pure_vector(g, &mut r);
                if kd_positive(&Operator::projector(&psi), 1e-9) && recognize_in(&fam, &psi, 1e-9).unwrap().is_none() {
                    unrecognized += 1;
                }
            }
            let mut missed = 0;
            for m in &fam {
                let phase = Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
                let psi = m.vector.scaled(phase);
                if recognize_in(&fam, &psi, 1e-9).unwrap().is_none() {
                    missed += 1;
                }
            }
            (size_ok, indicator, unrecognized, missed)
        })
        .collect();
    let sizes = sizes_ok && rows.iter().all(|r| r.0);
    let indicator = max_of(rows.iter().map(|r| r.1));
    let unrecognized: usize = rows.iter().map(|r| r.2).sum();
    let missed: usize = rows.iter().map(|r| r.3).sum();
    outcome(
        sizes && indicator <= 1e-12 && unrecognized == 0 && missed == 0,
        format!("sizes {}, indicator {indicator:.2e}, unrecognized {unrecognized}, members missed {missed}", if sizes { "ok" } else { "wrong" }),
    )
}

fn translated(t: &PhaseSpaceFunction, g: &FiniteAbelianGroup, gi: usize, ci: usize) -> PhaseSpaceFunction {
    PhaseSpaceFunction::from_fn(g, |x, c| t.get(g.sub_idx(x, gi), g.sub_idx(c, ci)))
}

fn wh_covariance() -> Outcome {
    let rows: Vec<(f64, bool)> = battery()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let n = g.order();
            let mut r = rng(5, i as u64);
            let mut cov = 0.0f64;
            for _ in 0..100 {
                let a = random_operator(g, &mut r);
                let (gi, ci) = (r.random_range(0..n), r.random_range(0..n));
                let z = Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
                let w = WHElement::from_indices(g, gi, ci, z).unwrap();
                let lhs = kd(&wh_conjugate(&a, &w).unwrap());
                cov = cov.max(lhs.max_abs_diff(&translated(&kd(&a), g, gi, ci)));
            }
            let fam = enumerate_kd_positive_pure(g).unwrap();
            let tables: Vec<PhaseSpaceFunction> = fam.iter().map(|m| m.kd_indicator()).collect();
            let mut closed = true;
            for _ in 0..5 {
                let w = WHElement::from_indices(g, r.random_range(0..n), r.random_range(0..n), Complex64::new(1.0, 0.0)).unwrap();
                for m in &fam {
                    let t = kd(&wh_conjugate(&m.projector(), &w).unwrap());
                    closed &= tables.iter().any(|s| s.max_abs_diff(&t) <= 1e-10);
                }
            }
            (cov, closed)
        })
        .collect();
    let cov = max_of(rows.iter().map(|r| r.0));
    let closed = rows.iter().all(|r| r.1);
    outcome(cov <= 1e-10 && closed, format!("covariance {cov:.2e}, family closed {closed}"))
}

fn support_criterion() -> Outcome {
    let oracle = [("Z1", 1), ("Z2", 3), ("Z3", 5), ("Z4", 8)];
    let oracle_ok = oracle.iter().all(|(name, d)| kd_real_dimension(&parse_group(name).unwrap()) == *d);
    let rows: Vec<(usize, usize, bool)> = battery()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut r = rng(6, i as u64);
            let mut disagree = 0;
            let mut real_seen = 0;
            for s in 0..1000 {
                let h = random_hermitian(g, &mut r);
                // every other sample is a real combination of family projectors, hence KD-real
                let h = if s % 2 == 0 { h } else { kd_real_sample(g, &mut r) };
                let rep = is_kd_real(&HermitianOperator::new(h).unwrap(), 1e-10);
                if !rep.method_agreement {
                    disagree += 1;
                }
                if rep.verdict {
                    real_seen += 1;
                }
            }
            let span = PureFamily::new(g).unwrap().span_dimension();
            (disagree, real_seen, span == kd_real_dimension(g))
        })
        .collect();
    let disagree: usize = rows.iter().map(|r| r.0).sum();
    let real_seen: usize = rows.iter().map(|r| r.1).sum();
    let dims = rows.iter().all(|r| r.2);
    outcome(
        oracle_ok && disagree == 0 && dims && real_seen > 0,
        format!("disagreements {disagree}, KD-real samples {real_seen}, span = kd_real_dimension on all groups {dims}, oracle dims {oracle_ok}"),
    )
}

fn kd_real_sample<R: Rng>(g: &FiniteAbelianGroup, r: &mut R) -> Operator {
    let fam = enumerate_kd_positive_pure(g).unwrap();
    let mut acc = Operator::zero(g);
    for _ in 0..4 {
        let m = &fam[r.random_range(0..fam.len())];
        acc = acc.add(&m.projector().scale(r.random_range(-1.0..1.0)));
    }
    acc.hermitian_part()
}

fn hull_facts() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["Z2", "Z3", "Z4", "Z8", "Z9"] {
        let g = parse_group(name).unwrap();
        let s = find_conv_gap_witness(&g, 0, 10_000).unwrap();
        ok &= s.witness.is_none() && s.best_gap <= 1e-6;
        parts.push(format!("{name} none (best {:.1e})", s.best_gap));
    }
    for name in ["Z2xZ2", "Z6"] {
        let g = parse_group(name).unwrap();
        let t0 = Instant::now();
        let s = find_conv_gap_witness(&g, 0, 10_000).unwrap();
        let dt = t0.elapsed();
        let verified = s.witness.as_ref().is_some_and(|w| independent_gap(&g, &w.rho, &w.functional) > 1e-6);
        ok &= verified && dt < Duration::from_secs(60);
        parts.push(format!("{name} gap {:.3} in {:.1}s", s.witness.as_ref().map_or(0.0, |w| w.gap), dt.as_secs_f64()));
    }
    outcome(ok, parts.join(", "))
}

/// `<W, rho> - max_i <W, P_i>` from scratch, after checking that `rho`
/// is a KD-positive state.
fn independent_gap(g: &FiniteAbelianGroup, rho: &Operator, w: &Operator) -> f64 {
    if rho.check_state(1e-9).is_err() || !kd_positive(rho, 1e-9) {
        return f64::NEG_INFINITY;
    }
    let h = HermitianOperator::new(rho.clone()).unwrap();
    if !is_kd_positive_state(&h, 1e-9).unwrap().verdict {
        return f64::NEG_INFINITY;
    }
    let fam = enumerate_kd_positive_pure(g).unwrap();
    let top = fam.iter().map(|m| w.hs_inner(&m.projector()).re).fold(f64::NEG_INFINITY, f64::max);
    w.hs_inner(rho).re - top
}

fn circle() -> Outcome {
    let mut r = rng(8, 0);
    let mut forward = 0.0f64;
    let mut forward_ok = true;
    for _ in 0..200 {
        let k = r.random_range(0..=8usize);
        let mut p: Vec<f64> = (0..2 * k + 1).map(|_| r.random_range(0.0..1.0)).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let a = BandLimitedOperator::diagonal(k, p.iter().map(|&x| Complex64::new(x, 0.0)).collect()).unwrap();
        let rep = circle_negativity_search(&a, 1024).unwrap();
        forward = forward.max(rep.violation());
        for (j, &pm) in p.iter().enumerate() {
            let m = j as i64 - k as i64;
            let z = Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
            forward = forward.max((circle_kd_eval(&a, m, z).unwrap() - pm).norm());
        }
        forward_ok &= circle_is_classical(&a, 1e-12).unwrap().verdict;
    }
    let states: Vec<BandLimitedOperator> = (0..1000)
        .map(|_| {
            let k = r.random_range(1..=8usize);
            let rank = r.random_range(1..=2 * k + 1);
            random_band_state(k, rank, &mut r)
        })
        .collect();
    let violations: Vec<f64> = states.par_iter().map(|a| circle_negativity_search(a, 1024).unwrap().violation()).collect();
    let nondiag = states.iter().all(|a| a.max_offdiag() > 1e-6);
    let weakest = violations.iter().copied().fold(f64::INFINITY, f64::min);
    let geo = BandLimitedOperator::geometric_state(0.01, 2000).unwrap();
    let geo_err = (geo.hs_norm_sq() - geometric_purity_limit(0.01)).abs();
    outcome(
        forward <= 1e-12 && forward_ok && nondiag && weakest > 1e-6 && geo_err <= 1e-4,
        format!("diagonal violation {forward:.2e}, weakest non-diagonal violation {weakest:.2e}, geometric purity error {geo_err:.2e}"),
    )
}

fn wigner_interpolation() -> Outcome {
    let mut worst = 0.0f64;
    for (i, name) in ["Z3", "Z9", "Z3xZ3"].iter().enumerate() {
        let g = parse_group(name).unwrap();
        let mut r = rng(9, i as u64);
        for _ in 0..100 {
            let h = random_hermitian(&g, &mut r);
            worst = worst.max(wigner(&h).unwrap().max_abs_imag());
        }
    }
    let mut refused = true;
    for name in ["Z2", "Z4", "Z2xZ2", "Z6", "Z8", "Z2xZ4", "Z12", "Z2xZ2xZ2"] {
        let g = parse_group(name).unwrap();
        let h = Operator::maximally_mixed(&g);
        let first = wigner(&h);
        let second = wigner(&h);
        refused &= matches!((&first, &second), (Err(Error::UnsupportedOrder(a)), Err(Error::UnsupportedOrder(b))) if a == b);
    }
    outcome(worst <= 1e-10 && refused, format!("max |Im W| {worst:.2e}, even groups refused {refused}"))
}

fn strip_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

fn reproducibility() -> Outcome {
    let run = |group: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_kdlab"))
            .args(["verify", "all", "--group", group, "--seed", "17"])
            .output()
            .expect("run kdlab");
        (out.status.code(), String::from_utf8(out.stdout).expect("utf-8"))
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for group in ["Z2xZ2", "Z3"] {
        let (c1, a) = run(group);
        let (c2, b) = run(group);
        let same = strip_timestamp(&a) == strip_timestamp(&b);
        ok &= same && c1 == Some(0) && c2 == Some(0) && !a.is_empty();
        parts.push(format!("{group} identical {same} ({} bytes, exit {:?})", a.len(), c1));
    }
    outcome(ok, parts.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("KD unitarity", kd_unitarity),
        ("O'Connell and anti-KD", oconnell),
        ("Born compatibility", born),
        ("classification", classification),
        ("WH covariance", wh_covariance),
        ("KD-real support criterion", support_criterion),
        ("hull facts", hull_facts),
        ("circle classicality", circle),
        ("odd-group Wigner", wigner_interpolation),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {status} {name}: {} [{:.1}s]", i + 1, o.detail, t0.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
