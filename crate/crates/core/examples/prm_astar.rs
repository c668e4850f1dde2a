//! Probabilistic roadmap on the factory layout and an A* query.
use covhole::harness::factory_layout;
use covhole::gridworld::WorldPoint;
use covhole::planner::{prm_build, shortest_route, PrmParams};

fn main() -> covhole::Result<()> {
    let layout = factory_layout();
    let prm = prm_build(&layout, PrmParams { nodes: 300, d_max: 6.0, seed: 7 })?;
    println!("{} nodes, {} edges", prm.nodes.len(), prm.edge_count());
    let (start, goal) = (WorldPoint::new(3.0, 20.0), WorldPoint::new(46.0, 20.0));
    match shortest_route(&prm, &layout, start, goal)? {
        Some((wps, len)) => {
            println!("route {len:.2} m through {} waypoints", wps.len());
            for w in wps {
                println!("  ({:.2}, {:.2})", w.x, w.y);
            }
        }
        None => println!("start and goal are not connected"),
    }
    Ok(())
}
