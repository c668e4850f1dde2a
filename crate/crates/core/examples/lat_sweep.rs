//! Mean alternative length against look-ahead time for two roadmap sizes.
use covhole::chmap::build_chmap;
use covhole::harness::{factory_layout, pipeline, summarize, sweep_lat, Scenario};

fn main() -> covhole::Result<()> {
    let sc = Scenario::preset("default")?;
    let layout = factory_layout();
    let (pl, sf) = pipeline::generate_maps(&sc, &layout)?;
    let splits = pipeline::make_dataset(&sc, &pl, &sf)?;
    let det = pipeline::train_detector(&sc, &splits.train, &splits.validation)?;
    let chmap = build_chmap(&det.model, &layout, &sc.tx, &pipeline::radio_config(&sc))?;
    let initial = pipeline::plan_initial(&sc, &layout)?.trajectory;
    let rows = sweep_lat(&sc, &sc.sweep, &chmap, &initial)?;
    for r in summarize(&sc.sweep, &rows) {
        println!(
            "N {:>4} D_max {:>4} LAT {:>5}: {:.3} m +- {:.3} ({} runs, {} failed)",
            r.nodes, r.d_max, r.lat, r.mean_alt_length, r.std_alt_length, r.runs, r.failures
        );
    }
    Ok(())
}
