//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use qfl_core::fiber::{continuity_scan, generators, n_block, relation_residuals, rep_graded, rep_l2, Section};
use qfl_core::fusion::{
    bisimp_outside_mass, bisimp_support, cg_decompose, delta_apply, fusion_rule, verify_coassociativity,
    verify_t12t13,
};
use qfl_core::gns::{matrix_unit_seeds, verify_invariance, verify_pentagon, verify_unitarity};
use qfl_core::haar::{
    haar_functional, psi_1, psi_1_phi_form, psi_q, psi_q_double_integral_form, psi_q_lattice, SupportBox,
};
use qfl_core::linalg::{identity, max_abs, spectral_norm};
use qfl_core::qlattice::{abs_n, in_domain, theta, QPoint};
use qfl_core::{BlockOperator, CMatrix, GradedElement, TestFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Q_GRID: [f64; 4] = [0.3, 0.5, 0.7, 0.9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_diagonal(rng: &mut ChaCha8Rng, q: f64, blocks: usize, n_max: usize) -> BlockOperator {
    let mut x = BlockOperator::zeros(q, n_max);
    for n in 1..=blocks {
        let b = x.block_mut(n).unwrap();
        for k in 0..n {
            b[(k, k)] = rand_c(rng);
        }
    }
    x
}

fn random_full(rng: &mut ChaCha8Rng, q: f64, blocks: usize, n_max: usize) -> BlockOperator {
    let mut x = BlockOperator::zeros(q, n_max);
    for n in 1..=blocks {
        let b = x.block_mut(n).unwrap();
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = rand_c(rng);
            }
        }
    }
    x
}

fn diagonal_units(q: f64, blocks: usize, n_max: usize) -> Vec<BlockOperator> {
    (1..=blocks)
        .flat_map(|n| (0..n).map(move |k| BlockOperator::matrix_unit(q, n_max, n, k, k)))
        .collect()
}

fn relations() -> Outcome {
    let mut worst: f64 = 0.0;
    for q in Q_GRID {
        let g = match generators(q, 20) {
            Ok(g) => g,
            Err(e) => return outcome(false, e.to_string()),
        };
        worst = worst.max(relation_residuals(&g).max());
    }
    outcome(worst <= 1e-12, format!("max residual {worst:.2e} (tol 1e-12)"))
}

fn hand_values() -> Outcome {
    let p = QPoint::new(0.5, 2, 0).unwrap();
    let abs_sq = abs_n(&p).powi(2);
    let nb = n_block(0.5, 2);
    let comm = &nb * nb.adjoint() - nb.adjoint() * &nb;
    let e0 = comm.column(0);
    let col_err = (e0[0] - c(-2.25)).norm().max(e0[1].norm());
    let err = (abs_sq - 2.25).abs().max(col_err);
    outcome(
        err <= 1e-14,
        format!("|N|^2(2,0) = {abs_sq}, [N,N*]e0 = {:.15}e0, error {err:.1e} (tol 1e-14)", e0[0].re),
    )
}

fn t12t13() -> Outcome {
    let mut worst: f64 = 0.0;
    for q in Q_GRID {
        for n in 1..=6 {
            for m in 1..=6 {
                match verify_t12t13(q, n, m) {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => return outcome(false, e.to_string()),
                }
            }
        }
    }
    outcome(worst <= 1e-12, format!("max residual {worst:.2e} over n, m <= 6 (tol 1e-12)"))
}

fn fusion_and_cg() -> Outcome {
    let mut orth: f64 = 0.0;
    let mut proj: f64 = 0.0;
    let mut completeness: f64 = 0.0;
    let mut rank_ok = true;
    let mut dims_ok = true;
    for q in Q_GRID {
        for n in 1..=8 {
            for m in 1..=8 {
                let cg = match cg_decompose(q, n, m) {
                    Ok(cg) => cg,
                    Err(e) => return outcome(false, e.to_string()),
                };
                dims_ok &= cg.fusion_list() == fusion_rule(n, m);
                dims_ok &= cg.fusion_list().iter().sum::<usize>() == n * m;
                let u = cg.unitary();
                orth = orth.max(spectral_norm(&(u.adjoint() * &u - identity(n * m))));
                let n_max = n + m - 1;
                let mut sum = CMatrix::zeros(n * m, n * m);
                for r in 1..=n_max {
                    let mult = cg.fusion_list().iter().filter(|&&s| s == r).count();
                    for l in 0..r {
                        let unit = BlockOperator::matrix_unit(q, n_max, r, l, l);
                        let p = delta_apply(&unit, n, m).unwrap();
                        proj = proj.max(spectral_norm(&(&p * &p - &p)));
                        let trace = p.trace().re;
                        rank_ok &= (trace - mult as f64).abs() < 1e-9;
                        sum += p;
                    }
                }
                completeness = completeness.max(spectral_norm(&(sum - identity(n * m))));
            }
        }
    }
    // The singlet of 2 (x) 2, compared up to a global sign.
    let mut singlet: f64 = 0.0;
    let mut sign = 0.0;
    for q in Q_GRID {
        let cg = cg_decompose(q, 2, 2).unwrap();
        let v = &cg.copy_of(1).unwrap().ladder[0];
        let norm = (q + 1.0 / q).sqrt();
        let mut expected = nalgebra::DVector::from_element(4, c(0.0));
        expected[2] = c(1.0 / (q.sqrt() * norm));
        expected[1] = c(-q.sqrt() / norm);
        let plus = max_abs(&CMatrix::from_column_slice(4, 1, (v - &expected).as_slice()));
        let minus = max_abs(&CMatrix::from_column_slice(4, 1, (v + &expected).as_slice()));
        if plus <= minus {
            sign = 1.0;
        } else {
            sign = -1.0;
        }
        singlet = singlet.max(plus.min(minus));
    }
    let pass = orth <= 1e-11 && proj <= 1e-11 && completeness <= 1e-11 && rank_ok && dims_ok && singlet <= 1e-12;
    outcome(
        pass,
        format!(
            "orthonormality {orth:.1e}, |P^2-P| {proj:.1e}, sum of projections {completeness:.1e}, \
             ranks {rank_ok}, dimensions {dims_ok}, singlet {singlet:.1e} with sign {sign:+}"
        ),
    )
}

fn coassociativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for q in Q_GRID {
        let mut xs = diagonal_units(q, 4, 8);
        for _ in 0..3 {
            xs.push(random_diagonal(&mut rng, q, 4, 8));
        }
        for x in &xs {
            for n in 2..=3 {
                for m in 2..=3 {
                    for p in 2..=3 {
                        match verify_coassociativity(x, n, m, p) {
                            Ok(r) => worst = worst.max(r),
                            Err(e) => return outcome(false, e.to_string()),
                        }
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-10, format!("max residual {worst:.2e} (tol 1e-10)"))
}

fn haar_identities() -> Outcome {
    let mut reindex: f64 = 0.0;
    let mut scaling: f64 = 0.0;
    for q in Q_GRID {
        for f in TestFunction::smooth_library() {
            let a = psi_q(&f, q).unwrap();
            let b = match psi_q_double_integral_form(&f, q) {
                Ok(b) => b,
                Err(e) => return outcome(false, e.to_string()),
            };
            reindex = reindex.max((a - b).norm() / a.norm().max(1.0));

            let wide = SupportBox {
                a_min: f.support().a_min * q,
                ..*f.support()
            };
            let base = psi_q_lattice(q, &wide, |p| {
                if in_domain(p, 1) {
                    f.eval_at(p)
                } else {
                    c(0.0)
                }
            })
            .unwrap();
            let shifted = psi_q_lattice(q, &wide, |p| {
                theta(p, -1)
                    .filter(|r| in_domain(r, 1))
                    .map_or(c(0.0), |r| f.eval_at(&r))
            })
            .unwrap();
            scaling = scaling.max((shifted - base * q * q).norm() / base.norm().max(1.0));
        }
    }
    outcome(
        reindex <= 1e-12 && scaling <= 1e-12,
        format!("double form {reindex:.1e}, theta scaling {scaling:.1e} (tol 1e-12)"),
    )
}

fn q_to_one() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for f in TestFunction::smooth_library() {
        let (p1, p1_phi) = match (psi_1(&f), psi_1_phi_form(&f)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
        };
        let forms = (p1 - p1_phi).norm();
        let errs: Vec<f64> = (2..=10)
            .map(|j| (psi_q(&f, 1.0 - 2f64.powi(-j)).unwrap() - p1).norm())
            .collect();
        // Eventually decreasing: strictly decreasing over j = 6..10.
        let tail_decreasing = errs[4..].windows(2).all(|w| w[1] < w[0]);
        let last = *errs.last().unwrap();
        pass &= forms <= 1e-8 && tail_decreasing && last <= 5e-3;
        lines.push(format!("{}: final {last:.1e}, forms {forms:.1e}", f.name()));
    }
    outcome(pass, lines.join("; "))
}

fn invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for q in Q_GRID {
        let mut fs = diagonal_units(q, 3, 3);
        fs.push(random_diagonal(&mut rng, q, 3, 3));
        let mut gs: Vec<BlockOperator> = (1..=3)
            .flat_map(|n| (0..n).flat_map(move |i| (0..n).map(move |j| BlockOperator::matrix_unit(q, 3, n, i, j))))
            .collect();
        gs.push(random_full(&mut rng, q, 3, 3));
        for f in &fs {
            for g in &gs {
                match verify_invariance(f, g) {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => return outcome(false, e.to_string()),
                }
            }
        }
    }
    let point = haar_functional(&BlockOperator::matrix_unit(0.5, 1, 1, 0, 0)).unwrap();
    let point_err = (point - c(0.375)).norm();
    outcome(
        worst <= 1e-10 && point_err <= 1e-14,
        format!("max residual {worst:.2e} (tol 1e-10), psi'(delta_(1,0)) at q = 0.5 is {}", point.re),
    )
}

fn pentagon() -> Outcome {
    let seeds = matrix_unit_seeds(3);
    let mut pent: f64 = 0.0;
    let mut iso: f64 = 0.0;
    let mut coiso: f64 = 0.0;
    let mut orders = Vec::new();
    for q in Q_GRID {
        let (p, u) = match (verify_pentagon(q, &seeds), verify_unitarity(q, 3)) {
            (Ok(p), Ok(u)) => (p, u),
            (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
        };
        pent = pent.max(p.residual());
        orders.push(format!("{:?}", p.held()));
        iso = iso.max(u.isometry);
        coiso = coiso.max(u.coisometry);
    }
    orders.dedup();
    outcome(
        pent <= 1e-8 && iso <= 1e-10 && coiso <= 1e-10,
        format!(
            "pentagon {pent:.1e} ({} ordering, {} seeds), isometry {iso:.1e}, co-isometry {coiso:.1e}",
            orders.join("/"),
            seeds.len()
        ),
    )
}

fn continuity() -> Outcome {
    let section = Section::standard();
    let qs: Vec<f64> = (1..=10).map(|j| 1.0 - 2f64.powi(-j)).collect();
    let rows = match continuity_scan(&section, &qs) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let classical = match section.classical_norm() {
        Ok(v) => v,
        Err(e) => return outcome(false, e.to_string()),
    };
    let diffs: Vec<f64> = rows.windows(2).map(|w| (w[1].norm - w[0].norm).abs()).collect();
    // Successive differences tend to zero: strictly decreasing over the
    // last five steps, the last one below 1e-2.
    let tail_decreasing = diffs[diffs.len() - 5..].windows(2).all(|w| w[1] < w[0]);
    let last_diff = *diffs.last().unwrap();
    let gap = (rows.last().unwrap().norm - classical).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut mass: f64 = 0.0;
    let mut bound_ok = true;
    for q in Q_GRID {
        let eps = 0.2;
        let support = bisimp_support(q, eps, 4).unwrap();
        bound_ok &= support.pairs.iter().all(|(n, _)| (*n as f64) < support.n_bound);
        let r_max = (1..).take_while(|r| q.powi(*r) > eps).count();
        let f = random_diagonal(&mut rng, q, r_max, r_max);
        let g_blocks = (1..=4).filter(|m| q.powi(*m) > eps).count();
        let g = random_full(&mut rng, q, g_blocks, 4);
        match bisimp_outside_mass(&f, &g, &support, 10) {
            Ok(m) => mass = mass.max(m),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let pass = tail_decreasing && last_diff <= 1e-2 && gap <= 1e-2 && mass == 0.0 && bound_ok;
    outcome(
        pass,
        format!(
            "final norm {:.6} vs classical {classical:.6} (gap {gap:.1e}), last difference {last_diff:.1e}, \
             bisimplifiability outside mass {mass:e}",
            rows.last().unwrap().norm
        ),
    )
}

fn random_graded(rng: &mut ChaCha8Rng, q: f64) -> GradedElement {
    let mut x = GradedElement::zero(q).unwrap();
    let terms = rng.gen_range(1..=12);
    for _ in 0..terms {
        let n = rng.gen_range(1..=6u32);
        let k = rng.gen_range(0..n);
        let deg = rng.gen_range(-2..=2i32);
        let p = QPoint::new(q, n, k).unwrap();
        if in_domain(&p, deg as i64) {
            x.insert(deg, n, k, rand_c(rng)).unwrap();
        }
    }
    x
}

fn cross_model() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for q in Q_GRID {
        for _ in 0..50 {
            let x = random_graded(&mut rng, q);
            let cutoff = x.max_block().max(2);
            let a = match rep_l2(&x, cutoff) {
                Ok(op) => op.norm(),
                Err(e) => return outcome(false, e.to_string()),
            };
            let b = match rep_graded(&x, x.max_block().max(1) as usize) {
                Ok(op) => op.norm(),
                Err(e) => return outcome(false, e.to_string()),
            };
            worst = worst.max((a - b).abs() / b.max(1.0));
        }
    }
    outcome(worst <= 1e-10, format!("max norm difference {worst:.2e} over 200 elements (tol 1e-10)"))
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Option<Duration>); 11] = [
        ("generator relations", relations, Some(Duration::from_secs(1))),
        ("hand-checked block values", hand_values, None),
        ("comultiplied matrix identity", t12t13, Some(Duration::from_secs(5))),
        ("fusion rules and Clebsch-Gordan basis", fusion_and_cg, None),
        ("coassociativity", coassociativity, Some(Duration::from_secs(30))),
        ("Haar identities", haar_identities, None),
        ("q -> 1 limit of the Haar functional", q_to_one, Some(Duration::from_secs(60))),
        ("right invariance", invariance, None),
        ("pentagon and unitarity", pentagon, Some(Duration::from_secs(60))),
        ("field continuity and bisimplifiability", continuity, Some(Duration::from_secs(120))),
        ("cross-model faithfulness", cross_model, None),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget_note = match budget {
            Some(b) => format!(", budget {:.0} s", b.as_secs_f64()),
            None => String::new(),
        };
        println!(
            "criterion {:>2} {} {name}: {} [{:.2} s{budget_note}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
