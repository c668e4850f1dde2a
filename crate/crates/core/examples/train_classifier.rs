//! Dataset, grid-searched RBF classifier and the validation operating point.
use covhole::harness::{factory_layout, pipeline, Scenario};

fn main() -> covhole::Result<()> {
    let sc = Scenario::preset("default")?;
    let (pl, sf) = pipeline::generate_maps(&sc, &factory_layout())?;
    let splits = pipeline::make_dataset(&sc, &pl, &sf)?;
    for (name, d) in [("train", &splits.train), ("validation", &splits.validation), ("test", &splits.test)] {
        println!("{name:>10}: {} rows, {} holes", d.len(), d.count_label(0));
    }
    let det = pipeline::train_detector(&sc, &splits.train, &splits.validation)?;
    if let Some(cv) = &det.cv {
        for cell in &cv.cells {
            println!("C {:>5} gamma {:>4}: mean g-mean {:.4}", cell.c, cell.gamma, cell.score);
        }
        println!("picked C = {}, gamma = {}", cv.best_c, cv.best_gamma);
    }
    if let Some(op) = det.operating_point {
        println!("threshold {:.4}: TPR {:.3}, FPR {:.3}", op.threshold, op.tpr, op.fpr);
    }
    println!("{} support vectors", det.model.support_vectors.len());
    Ok(())
}
