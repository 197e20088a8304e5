use qfl_core::fiber::{continuity_scan, generators, relation_residuals, ContinuityRow, Section};
use qfl_core::fusion::{cg_decompose, cg_rows, CgRow};
use qfl_core::gns::{matrix_unit_seeds, verify_invariance, verify_pentagon, verify_unitarity};
use qfl_core::haar::{psi_1, psi_1_phi_form, psi_q, psi_q_double_integral_form, TestFunction};
use qfl_core::linalg::{identity, spectral_norm};
use qfl_core::{BlockOperator, CheckReport, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::write_rows;
use crate::CliError;

/// Outcome of a subcommand: `true` when every check passed.
pub type Verdict = Result<bool, CliError>;

fn emit_reports(cfg: &RunConfig, per_q: Vec<Vec<CheckReport>>) -> Verdict {
    let reports: Vec<CheckReport> = per_q.into_iter().flatten().collect();
    write_rows(&reports, cfg.format, cfg.out.as_deref())?;
    Ok(reports.iter().all(|r| r.pass))
}

pub fn relations(cfg: &RunConfig) -> Verdict {
    let tol = cfg.tolerance(1e-12);
    let per_q = cfg
        .q_grid
        .par_iter()
        .map(|&q| -> Result<Vec<CheckReport>, CliError> {
            let r = relation_residuals(&generators(q, cfg.n_max)?);
            let inputs = format!("n_max={}", cfg.n_max);
            Ok(vec![
                CheckReport::new("relation-an-qna", q, &inputs, r.commutation, tol),
                CheckReport::new("relation-self-commutator", q, &inputs, r.self_commutator, tol),
                CheckReport::new("relation-casimir", q, &inputs, r.casimir, tol),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    emit_reports(cfg, per_q)
}

/// Prints the fusion list, writes the coefficient table to `--out` when
/// given, and reports orthonormality of the decomposition on stdout.
pub fn fusion(cfg: &RunConfig, n: usize, m: usize) -> Verdict {
    if n == 0 || m == 0 {
        return Err(CliError::Config("--n and --m must be at least 1".into()));
    }
    let tol = cfg.tolerance(1e-11);
    let results = cfg
        .q_grid
        .par_iter()
        .map(|&q| cg_decompose(q, n, m))
        .collect::<Result<Vec<_>, _>>()?;
    let list = results[0].fusion_list();
    let joined: Vec<String> = list.iter().map(|r| r.to_string()).collect();
    println!("fusion {n} x {m} = {}", joined.join(","));
    let mut reports = Vec::new();
    let mut table: Vec<CgRow> = Vec::new();
    for cg in &results {
        let u = cg.unitary();
        let inputs = format!("n={n},m={m}");
        let dim_defect = (list.iter().sum::<usize>() as f64 - (n * m) as f64).abs();
        reports.push(CheckReport::new("fusion-dimension", cg.q, &inputs, dim_defect, 0.0));
        let orth = spectral_norm(&(u.adjoint() * &u - identity(n * m)));
        reports.push(CheckReport::new("cg-orthonormality", cg.q, &inputs, orth, tol));
        table.extend(cg_rows(cg));
    }
    if let Some(path) = cfg.out.as_deref() {
        write_rows(&table, cfg.format, Some(path))?;
    }
    write_rows(&reports, cfg.format, None)?;
    Ok(reports.iter().all(|r| r.pass))
}

/// All coefficients with `n, m <= max_block` over the grid.
pub fn cg_export(cfg: &RunConfig, max_block: usize) -> Verdict {
    let pairs: Vec<(f64, usize, usize)> = cfg
        .q_grid
        .iter()
        .flat_map(|&q| (1..=max_block).flat_map(move |n| (1..=max_block).map(move |m| (q, n, m))))
        .collect();
    let tables = pairs
        .par_iter()
        .map(|&(q, n, m)| cg_decompose(q, n, m).map(|cg| cg_rows(&cg)))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<CgRow> = tables.into_iter().flatten().collect();
    write_rows(&rows, cfg.format, cfg.out.as_deref())?;
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct HaarRow {
    pub function: String,
    pub q: f64,
    pub psi_q: f64,
    pub psi_q_double_form: f64,
    pub psi_1: f64,
    pub psi_1_phi_form: f64,
    pub delta: f64,
}

/// `psi_q(f)` along the grid next to `psi_1(f)`. `--function` takes a
/// comma-separated list. The exit status reflects agreement of `psi_q` with
/// its double Jackson form.
pub fn haar(cfg: &RunConfig) -> Verdict {
    let tol = cfg.tolerance(1e-12);
    let functions = cfg
        .function
        .split(',')
        .map(|name| {
            TestFunction::by_name(name.trim())
                .ok_or_else(|| CliError::Config(format!("unknown test function {name:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut pass = true;
    for f in &functions {
        let (p1, p1_phi) = (psi_1(f)?, psi_1_phi_form(f)?);
        let per_q = cfg
            .q_grid
            .par_iter()
            .map(|&q| -> Result<HaarRow, CliError> {
                let single = psi_q(f, q)?;
                let double = psi_q_double_integral_form(f, q)?;
                Ok(HaarRow {
                    function: f.name().to_string(),
                    q,
                    psi_q: single.re,
                    psi_q_double_form: double.re,
                    psi_1: p1.re,
                    psi_1_phi_form: p1_phi.re,
                    delta: (single - p1).norm(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        for row in &per_q {
            pass &= (row.psi_q - row.psi_q_double_form).abs() <= tol * row.psi_q.abs().max(1.0);
        }
        rows.extend(per_q);
    }
    write_rows(&rows, cfg.format, cfg.out.as_deref())?;
    Ok(pass)
}

pub fn pentagon(cfg: &RunConfig, blocks: u32) -> Verdict {
    let seeds = matrix_unit_seeds(blocks);
    let per_q = cfg
        .q_grid
        .iter()
        .map(|&q| -> Result<Vec<CheckReport>, CliError> {
            let p = verify_pentagon(q, &seeds)?;
            let u = verify_unitarity(q, blocks)?;
            let inputs = format!("blocks<={blocks},seeds={},ordering={:?}", seeds.len(), p.held());
            let unit_inputs = format!("blocks<={blocks}");
            Ok(vec![
                CheckReport::new("pentagon", q, inputs, p.residual(), cfg.tolerance(1e-8)),
                CheckReport::new("isometry", q, &unit_inputs, u.isometry, cfg.tolerance(1e-10)),
                CheckReport::new("co-isometry", q, &unit_inputs, u.coisometry, cfg.tolerance(1e-10)),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    emit_reports(cfg, per_q)
}

fn random_entry(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Right invariance on random pairs: `f` diagonal and `g` dense, both with
/// blocks `<= blocks`. Each q gets its own stream derived from the seed.
pub fn invariance(cfg: &RunConfig, blocks: usize, trials: usize) -> Verdict {
    let tol = cfg.tolerance(1e-10);
    let per_q = cfg
        .q_grid
        .par_iter()
        .enumerate()
        .map(|(i, &q)| -> Result<Vec<CheckReport>, CliError> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let mut worst: f64 = 0.0;
            for _ in 0..trials {
                let mut f = BlockOperator::zeros(q, blocks);
                let mut g = BlockOperator::zeros(q, blocks);
                for n in 1..=blocks {
                    let (fb, gb) = (f.block_mut(n).unwrap(), g.block_mut(n).unwrap());
                    for r in 0..n {
                        fb[(r, r)] = random_entry(&mut rng);
                        for c in 0..n {
                            gb[(r, c)] = random_entry(&mut rng);
                        }
                    }
                }
                worst = worst.max(verify_invariance(&f, &g)?);
            }
            let inputs = format!("blocks<={blocks},trials={trials}");
            Ok(vec![CheckReport::new("right-invariance", q, inputs, worst, tol).with_seed(cfg.seed)])
        })
        .collect::<Result<Vec<_>, _>>()?;
    emit_reports(cfg, per_q)
}

/// Norm scan of a section along the grid, ending with the classical norm
/// at `q = 1`.
pub fn continuity(cfg: &RunConfig, section: &str) -> Verdict {
    let section = Section::by_name(section).ok_or_else(|| CliError::Config(format!("unknown section {section:?}")))?;
    let mut rows: Vec<ContinuityRow> = continuity_scan(&section, &cfg.q_grid)?;
    rows.push(ContinuityRow {
        q: 1.0,
        norm: section.classical_norm()?,
    });
    write_rows(&rows, cfg.format, cfg.out.as_deref())?;
    Ok(true)
}
