use crate::artifacts::OutDir;
use crate::raster::read_raster;
use crate::{data_err, run_err, CliError, NmfArgs};
use gibbs_ot::io::{self, NmfTraceRecord};
use gibbs_ot::nmf::{NmfDataset, TrainConfig, WassersteinNmf};
use gibbs_ot::presets::{raster_grid_support, raster_to_measure};
use std::fs;

pub fn run(args: &NmfArgs) -> Result<(), CliError> {
    let out = OutDir::create(&args.out_dir)?;
    let mut paths: Vec<_> = fs::read_dir(&args.images)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.images.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
                Some("pgm") | Some("csv")
            )
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no .pgm or .csv rasters found",
            args.images.display()
        )));
    }

    let mut dims: Option<(usize, usize)> = None;
    let mut instances = Vec::with_capacity(paths.len());
    for path in &paths {
        let raster = read_raster(path)?;
        match dims {
            None => dims = Some((raster.width, raster.height)),
            Some(d) if d != (raster.width, raster.height) => {
                return Err(CliError::Data(format!(
                    "{}: dimensions {}x{} differ from the first image's {}x{}",
                    path.display(),
                    raster.width,
                    raster.height,
                    d.0,
                    d.1
                )));
            }
            _ => {}
        }
        instances.push(
            raster_to_measure(raster.width, &raster.intensities)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        );
    }
    let (width, height) = dims.expect("at least one raster");
    let shared_support = raster_grid_support(width, height);
    let dataset = NmfDataset::new(instances, shared_support).map_err(data_err)?;

    let mut config =
        TrainConfig::new(args.k, args.gamma, args.epochs, args.seed).map_err(|e| {
            CliError::Config(e.to_string())
        })?;
    config.tau = args.tau.max(1);
    let mut trainer = WassersteinNmf::new(dataset, config).map_err(run_err)?;
    let mut trace = Vec::with_capacity(args.epochs as usize);
    for _ in 0..args.epochs {
        let report = trainer.epoch().map_err(run_err)?;
        trace.push(NmfTraceRecord::from(&report));
    }

    io::write_jsonl(&out.path("trace.jsonl"), &trace).map_err(data_err)?;
    io::write_model(&out.path("model.json"), &trainer.model, &trainer.dataset.shared_support)
        .map_err(data_err)?;
    for (k, component) in trainer.model.components.iter().enumerate() {
        io::write_matrix_csv(&out.path(&format!("component_{k}.csv")), height, width, component)
            .map_err(data_err)?;
    }
    out.write_meta(
        "nmf",
        serde_json::json!({
            "images": paths.len(),
            "k": args.k,
            "gamma": args.gamma,
            "epochs": args.epochs,
            "seed": args.seed,
        }),
    )?;
    Ok(())
}
