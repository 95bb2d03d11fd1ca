use crate::artifacts::{OutDir, SolveSummary};
use crate::{data_err, parse_schedule, run_err, CliError, Method, SolveArgs};
use gibbs_ot::io::{self, TraceRecord};
use gibbs_ot::runner::run_annealed;
use gibbs_ot::sampler::{init_chain, OtProblem};
use gibbs_ot::sinkhorn::{sinkhorn, SinkhornConfig};
use gibbs_ot::{solve_exact, TemperatureSchedule};

pub fn run(args: &SolveArgs) -> Result<(), CliError> {
    let p = io::read_measure(&args.p).map_err(data_err)?;
    let q = io::read_measure(&args.q).map_err(data_err)?;
    let cost = io::read_cost_csv(&args.cost).map_err(data_err)?;
    let problem = OtProblem::new(&p, &q, &cost).map_err(data_err)?;
    let out = OutDir::create(&args.out_dir)?;

    let exact = if args.with_exact || args.method == Method::Exact {
        Some(solve_exact(&p, &q, &cost).map_err(run_err)?)
    } else {
        None
    };

    let summary = match args.method {
        Method::Exact => {
            let sol = exact.as_ref().expect("solved above");
            io::write_plan(&out.path("plan.json"), &sol.plan).map_err(data_err)?;
            SolveSummary {
                method: "exact".into(),
                cost_estimate: sol.cost,
                plan_cost: sol.cost,
                exact_cost: Some(sol.cost),
                relative_gap: Some(0.0),
            }
        }
        Method::Sinkhorn => {
            let epsilon = args.epsilon.unwrap_or(0.1 * cost.mean());
            let iters = args.iters.unwrap_or(1000);
            let config =
                SinkhornConfig::new(epsilon, iters, 1e-9).map_err(|e| CliError::Config(e.to_string()))?;
            let result = sinkhorn(&p, &q, &cost, &config).map_err(run_err)?;
            let plan_cost = result.plan.transport_cost(&cost).map_err(run_err)?;
            io::write_plan(&out.path("plan.json"), &result.plan).map_err(data_err)?;
            out.write_json(
                "sinkhorn.json",
                &serde_json::json!({
                    "iterations": result.iterations,
                    "residual": result.residual,
                    "converged": result.converged,
                    "epsilon": epsilon,
                }),
            )?;
            let exact_cost = exact.as_ref().map(|s| s.cost);
            SolveSummary {
                method: "sinkhorn".into(),
                cost_estimate: plan_cost,
                plan_cost,
                exact_cost,
                relative_gap: exact_cost.map(|w| (plan_cost - w).abs() / w.abs().max(f64::MIN_POSITIVE)),
            }
        }
        Method::Gibbs => {
            let (mut schedule, sweeps) = gibbs_schedule(args, problem.rows().max(problem.cols()))?;
            let mut state = init_chain(&problem, args.seed);
            let mut trace = Vec::with_capacity(sweeps as usize);
            run_annealed(&mut state, &problem, &mut schedule, sweeps, |s| {
                trace.push(TraceRecord {
                    n: s.n,
                    temp: s.temp,
                    v_z: s.envelope_energy,
                    v_gh: s.dual_energy,
                    feas: s.feasibility,
                });
            })
            .map_err(run_err)?;
            io::write_jsonl(&out.path("trace.jsonl"), &trace).map_err(data_err)?;
            io::write_checkpoint(&out.path("checkpoint.json"), &state, Some(&schedule))
                .map_err(data_err)?;
            let plan = state.recover_plan(&problem).map_err(run_err)?;
            let plan_cost = plan.transport_cost(&cost).map_err(run_err)?;
            io::write_plan(&out.path("plan.json"), &plan).map_err(data_err)?;
            let cost_estimate = state.envelope_energy(&problem);
            let exact_cost = exact.as_ref().map(|s| s.cost);
            SolveSummary {
                method: "gibbs".into(),
                cost_estimate,
                plan_cost,
                exact_cost,
                relative_gap: exact_cost
                    .map(|w| (cost_estimate - w).abs() / w.abs().max(f64::MIN_POSITIVE)),
            }
        }
    };
    out.write_json("summary.json", &summary)?;
    out.write_meta(
        "solve",
        serde_json::json!({ "seed": args.seed, "tau": args.tau, "with_exact": args.with_exact }),
    )?;
    Ok(())
}

/// Schedule plus sweep budget for a gibbs run: `--schedule` wins, else a
/// geometric schedule over `--iters` sweeps (default 1000) with the grid
/// size taken from the problem.
fn gibbs_schedule(args: &SolveArgs, grid: usize) -> Result<(TemperatureSchedule, u32), CliError> {
    match &args.schedule {
        Some(spec) => {
            let schedule = parse_schedule(spec, grid as u32)?;
            let sweeps = args.iters.unwrap_or(match &schedule {
                TemperatureSchedule::Geometric { l, .. } => *l,
                _ => 1000,
            });
            Ok((schedule, sweeps))
        }
        None => {
            let sweeps = args.iters.unwrap_or(1000);
            let schedule = TemperatureSchedule::geometric(2.0, sweeps.max(1), grid as u32)
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok((schedule, sweeps))
        }
    }
}
