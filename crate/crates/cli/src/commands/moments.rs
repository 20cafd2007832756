//! `moments`: radial moments `ℳ_b` of the stationary profile over a grid of
//! orders, with the sign law of the biharmonic case.

use super::{domain_as_usage, execute, usage};
use crate::config::Range;
use crate::report::{num, Check};
use crate::{CliError, Common, Context};
use clap::Args;
use polyheat::kernels::KernelSpec;
use polyheat::moments::{moment_b, moment_table, Sign};
use serde::Serialize;

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Orders b as lo:hi:step, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    b_grid: Option<Range>,
    /// Largest error of the unit mass.
    #[arg(long)]
    mass_tol: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MomentsConfig {
    command: &'static str,
    m: u32,
    n: u32,
    b_grid: [f64; 3],
    mass_tol: f64,
    #[serde(flatten)]
    common: Common,
}

/// Agreement of a row with the sign law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Agree,
    /// The value lies within its error bar where a nonzero sign is
    /// predicted.
    Unresolved,
    Mismatch,
    /// No law is available for this order or operator.
    Unpredicted,
}

impl Status {
    fn of(predicted: Sign, observed: Sign) -> Self {
        match (predicted, observed) {
            (Sign::Undetermined, _) => Status::Unpredicted,
            (p, o) if p == o => Status::Agree,
            (_, Sign::Zero) => Status::Unresolved,
            _ => Status::Mismatch,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Status::Agree => "agree",
            Status::Unresolved => "unresolved",
            Status::Mismatch => "mismatch",
            Status::Unpredicted => "unpredicted",
        }
    }
}

pub fn run(a: MomentsArgs, ctx: &Context) -> Result<bool, CliError> {
    let s = &ctx.settings;
    let default_grid = Range {
        lo: -0.5,
        hi: 18.0,
        step: 0.25,
    };
    let grid = s.value("b-grid", a.b_grid, default_grid)?;
    let cfg = MomentsConfig {
        command: "moments",
        m: s.value("m", a.m, 2)?,
        n: s.value("n", a.n, 1)?,
        b_grid: [grid.lo, grid.hi, grid.step],
        mass_tol: s.value("mass-tol", a.mass_tol, 1e-8)?,
        common: ctx.common.clone(),
    };
    let spec = KernelSpec::new(cfg.m, cfg.n).map_err(domain_as_usage)?;
    if !(grid.lo > -(cfg.n as f64)) {
        return Err(usage(format!(
            "moments need b > -n = {} (got {})",
            -(cfg.n as f64),
            grid.lo
        )));
    }
    let bs = grid.points();

    execute(ctx, "moments", &cfg, |out, checks| {
        let mut rows = moment_table(&spec, &bs)?;
        // The sign law is specific to the biharmonic operator.
        if cfg.m != 2 {
            for r in &mut rows {
                r.sign_predicted = Sign::Undetermined;
            }
        }
        let statuses: Vec<Status> = rows
            .iter()
            .map(|r| Status::of(r.sign_predicted, r.sign_observed))
            .collect();
        let table: Vec<Vec<String>> = rows
            .iter()
            .zip(&statuses)
            .map(|(r, st)| {
                vec![
                    num(r.b),
                    num(r.value),
                    num(r.err),
                    r.sign_predicted.to_string(),
                    r.sign_observed.to_string(),
                    st.as_str().into(),
                    if *st == Status::Unpredicted {
                        "moment value".into()
                    } else {
                        "sign law of the stationary moments".into()
                    },
                ]
            })
            .collect();
        out.table(
            "moments.csv",
            &[
                "b",
                "value",
                "err",
                "sign_predicted",
                "sign_observed",
                "status",
                "check",
            ],
            &table,
        )?;

        let mass = moment_b(&spec, 0.0)?;
        checks.push(Check::at_most(
            "unit_mass",
            "the stationary profile has unit mass",
            (mass.value - 1.0).abs(),
            cfg.mass_tol,
        ));
        if cfg.m == 2 {
            let count = |s: Status| statuses.iter().filter(|&&x| x == s).count() as f64;
            checks.push(Check::at_most(
                "sign_mismatches",
                "observed signs follow the sign law",
                count(Status::Mismatch),
                0.0,
            ));
            checks.push(Check::at_least(
                "signs_resolved",
                "orders whose sign is resolved beyond the error bar",
                count(Status::Agree),
                1.0,
            ));
        }
        Ok(())
    })
}
