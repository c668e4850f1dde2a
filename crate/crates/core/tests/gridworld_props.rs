use covhole::gridworld::{Cell, GridMap, WorldPoint};
use proptest::prelude::*;

fn random_map(w: usize, h: usize, res: f64, blocked: &[bool]) -> GridMap {
    let cells = (0..w * h).map(|i| blocked[i % blocked.len()]).collect();
    GridMap::from_cells(w, h, res, WorldPoint::new(-3.0, 2.0), cells).unwrap()
}

fn map_strategy() -> impl Strategy<Value = GridMap> {
    (3usize..16, 3usize..16, prop_oneof![Just(0.5), Just(1.0), Just(0.25)], prop::collection::vec(prop::bool::weighted(0.25), 1..64))
        .prop_map(|(w, h, res, b)| random_map(w, h, res, &b))
}

fn point_in(map: &GridMap, u: f64, v: f64) -> WorldPoint {
    let (lo, hi) = map.bounds();
    WorldPoint::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y))
}

proptest! {
    #[test]
    fn segment_free_is_symmetric(map in map_strategy(), a in (0.0..1.0f64, 0.0..1.0f64), b in (0.0..1.0f64, 0.0..1.0f64)) {
        let (p, q) = (point_in(&map, a.0, a.1), point_in(&map, b.0, b.1));
        prop_assert_eq!(map.segment_free(p, q), map.segment_free(q, p));
    }

    #[test]
    fn free_segments_sample_only_free_cells(map in map_strategy(), a in (0.0..1.0f64, 0.0..1.0f64), b in (0.0..1.0f64, 0.0..1.0f64)) {
        let (p, q) = (point_in(&map, a.0, a.1), point_in(&map, b.0, b.1));
        if map.segment_free(p, q) {
            let step = map.resolution() / 4.0;
            let n = (p.distance(&q) / step).ceil().max(1.0) as usize;
            for k in 0..=n {
                let s = p.lerp(&q, k as f64 / n as f64);
                prop_assert!(map.point_free(s), "sample {:?} of a free segment is blocked", s);
            }
        }
    }

    #[test]
    fn cell_center_maps_back(map in map_strategy(), ix in 0usize..16, iy in 0usize..16) {
        let c = Cell::new(ix % map.width(), iy % map.height());
        prop_assert_eq!(map.world_to_cell(map.cell_center(c)), Some(c));
    }

    #[test]
    fn supercover_contains_every_sampled_cell(map in map_strategy(), a in (0.0..1.0f64, 0.0..1.0f64), b in (0.0..1.0f64, 0.0..1.0f64)) {
        let (p, q) = (point_in(&map, a.0, a.1), point_in(&map, b.0, b.1));
        if let Some(cells) = map.supercover(p, q) {
            let n = (p.distance(&q) / (map.resolution() / 8.0)).ceil().max(1.0) as usize;
            for k in 0..=n {
                if let Some(c) = map.world_to_cell(p.lerp(&q, k as f64 / n as f64)) {
                    prop_assert!(cells.contains(&c));
                }
            }
        }
    }
}

#[test]
fn offset_origin_quantization() {
    let map = GridMap::new(20, 20, 0.5, WorldPoint::new(-5.0, -5.0)).unwrap();
    assert_eq!(map.world_to_cell(WorldPoint::new(0.0, 0.0)), Some(Cell::new(10, 10)));
}
