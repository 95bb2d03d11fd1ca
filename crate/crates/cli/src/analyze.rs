use crate::artifacts::OutDir;
use crate::{data_err, parse_schedule, run_err, AnalyzeArgs, CliError};
use gibbs_ot::analysis::{evaluate_bounds, BoundQuery, BoundStep};
use gibbs_ot::io::{self, AnalysisRecord};
use gibbs_ot::runner::replay_with_analysis;
use gibbs_ot::sampler::OtProblem;
use gibbs_ot::TemperatureSchedule;

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let p = io::read_measure(&args.p).map_err(data_err)?;
    let q = io::read_measure(&args.q).map_err(data_err)?;
    let cost = io::read_cost_csv(&args.cost).map_err(data_err)?;
    let problem = OtProblem::new(&p, &q, &cost).map_err(data_err)?;
    let (mut state, embedded) = io::read_checkpoint(&args.checkpoint).map_err(data_err)?;
    if state.dual_row.len() != problem.rows() || state.dual_col.len() != problem.cols() {
        return Err(CliError::Data(format!(
            "checkpoint is {}x{} but the problem is {}x{}",
            state.dual_row.len(),
            state.dual_col.len(),
            problem.rows(),
            problem.cols()
        )));
    }
    let mut schedule = match (&args.schedule, embedded) {
        (Some(spec), _) => parse_schedule(spec, problem.rows().max(problem.cols()) as u32)?,
        (None, Some(s)) => s,
        (None, None) => {
            return Err(CliError::Config(
                "checkpoint carries no schedule; pass --schedule".into(),
            ))
        }
    };
    if let TemperatureSchedule::Geometric { l, .. } = &schedule {
        if state.sweeps + args.iters as u64 > *l as u64 {
            return Err(CliError::Config(format!(
                "schedule horizon l = {l} exhausted: checkpoint at sweep {} cannot replay {} more",
                state.sweeps, args.iters
            )));
        }
    }

    let out = OutDir::create(&args.out_dir)?;
    let rows = replay_with_analysis(&mut state, &problem, &mut schedule, args.iters)
        .map_err(run_err)?;
    let records: Vec<AnalysisRecord> = rows
        .iter()
        .map(|r| AnalysisRecord {
            n: r.n,
            temp: r.temp,
            phi_dot_q: r.phi_dot_q,
            psi_dot_p: r.psi_dot_p,
            d_odd: r.d_odd,
            d_even: r.d_even,
            drift: r.drift,
            t_crit: r.t_crit,
            r: r.residual,
        })
        .collect();
    io::write_jsonl(&out.path("analysis.jsonl"), &records).map_err(data_err)?;
    io::write_checkpoint(&out.path("checkpoint.json"), &state, Some(&schedule))
        .map_err(data_err)?;

    if let Some(k) = args.bound_k {
        let steps: Vec<BoundStep> = rows
            .iter()
            .flat_map(|r| {
                r.steps.iter().zip(&r.step_temps).map(|(s, &temp)| BoundStep {
                    temp,
                    c_bound: s.c_bound,
                    d_bound: s.d_bound,
                })
            })
            .collect();
        let query = BoundQuery {
            a: vec![args.bound_a; steps.len()],
            k,
            gamma: args.bound_gamma,
            epsilon: args.bound_eps,
        };
        let report = evaluate_bounds(&query, &steps, problem.rows().max(problem.cols()))
            .map_err(|e| CliError::Config(e.to_string()))?;
        out.write_json("bounds.json", &report)?;
    }
    out.write_meta(
        "analyze",
        serde_json::json!({ "checkpoint": args.checkpoint.display().to_string(), "iters": args.iters }),
    )?;
    Ok(())
}
