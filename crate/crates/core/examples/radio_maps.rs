//! Path-loss and shadowed RSS over the factory floor, with coverage shares.
use covhole::harness::{factory_layout, pipeline, Scenario};

fn main() -> covhole::Result<()> {
    let sc = Scenario::preset("default")?;
    let layout = factory_layout();
    let (pl, sf) = pipeline::generate_maps(&sc, &layout)?;
    let free: Vec<usize> = (0..layout.len()).filter(|&i| !layout.blocked(layout.cell_at(i))).collect();
    let below = |v: &[f64]| free.iter().filter(|&&i| v[i] <= sc.radio.sensitivity).count();
    println!("{} x {} cells, {} free", layout.width(), layout.height(), free.len());
    println!("below {} dBm: path loss only {}, with fading {}", sc.radio.sensitivity, below(pl.values()), below(sf.values()));
    for p in [sc.start, sc.target, sc.tx.position] {
        println!("({:>5.1}, {:>5.1}): PL {:>7.2} dBm, SF {:>7.2} dBm", p.x, p.y, pl.at(p).unwrap(), sf.at(p).unwrap());
    }
    Ok(())
}
