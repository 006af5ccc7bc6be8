//! One PASS/FAIL line per acceptance criterion. Tolerance 1e-10 unless stated.

use qdsim::lattice::Lattice;
use qdsim::protocols::{prepare_ground, GroundVariant, Mode};
use qdsim::verify::{self, Check, TOL};
use qdsim::Result;
use std::process::ExitCode;
use std::time::Instant;

fn ground_criterion() -> Result<Vec<Check>> {
    let closed = verify::braid_min_closed_form()?;
    let mut out = Vec::new();
    for name in ["braid-min", "fuse-min"] {
        let lat = Lattice::named(name)?;
        let s = prepare_ground(&lat, GroundVariant::PivotFourier, Mode::Exact)?.final_state;
        if name == "braid-min" {
            out.push(Check::within("fidelity vs closed form", 1.0 - s.fidelity(&closed)?, TOL));
        }
        out.push(Check::within(format!("{name} syndrome"), lat.site_syndrome(&s)?.max(), TOL));
    }
    Ok(out)
}

type Criterion = (&'static str, f64, fn() -> Result<Vec<Check>>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 L± matrices and semidirect forms", 1.0, || Ok([verify::regular_matrices()?, verify::semidirect_forms()?].concat())),
        ("2 ground preparation", 5.0, ground_criterion),
        ("3 braid demo distributions", 5.0, verify::braid_demo),
        ("4 braiding relations for all ν", 60.0, verify::braiding_relations),
        ("5 fusion", 30.0, verify::fusion_checks),
        ("6 ribbon commutators", 120.0, verify::ribbon_commutators),
        ("7 creation, moves and path independence", 60.0, verify::creation_and_moves),
        ("8 interferometry", 30.0, verify::interferometry),
    ];
    let mut all = true;
    for (name, limit, run) in criteria {
        let t0 = Instant::now();
        let res = run();
        let dt = t0.elapsed().as_secs_f64();
        let (ok, detail) = match &res {
            Ok(checks) => {
                let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
                for c in &failed {
                    println!("    {c}");
                }
                (failed.is_empty() && dt < limit, format!("{} checks, {} failed", checks.len(), failed.len()))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!("{} criterion {name}: {detail}, {dt:.2}s (limit {limit}s)", if ok { "PASS" } else { "FAIL" });
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
