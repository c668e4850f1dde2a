use covhole::dataset::{stratified_partition, Normalization};
use proptest::prelude::*;

proptest! {
    #[test]
    fn partition_is_stratified_and_complete(
        labels in prop::collection::vec(prop::bool::weighted(0.2), 30..400),
        a in 1u32..8, b in 1u32..8, c in 1u32..8,
        seed in any::<u64>(),
    ) {
        let labels: Vec<u8> = labels.into_iter().map(u8::from).collect();
        let holes = labels.iter().filter(|&&l| l == 0).count();
        let covered = labels.len() - holes;
        prop_assume!(holes >= 3 && covered >= 3);
        let total = (a + b + c) as f64;
        let fr = [a as f64 / total, b as f64 / total, 1.0 - a as f64 / total - b as f64 / total];
        // every part gets at least one sample per class, which can exceed a share below one
        prop_assume!(fr.iter().all(|f| f * holes as f64 >= 1.0 && f * covered as f64 >= 1.0));
        let parts = stratified_partition(&labels, &fr, seed).unwrap();

        let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());

        for (part, f) in parts.iter().zip(fr) {
            for (class, n) in [(0u8, holes), (1u8, covered)] {
                let got = part.iter().filter(|&&i| labels[i] == class).count() as f64;
                prop_assert!((got - f * n as f64).abs() <= 1.0 + 1e-9, "class {} got {} want {}", class, got, f * n as f64);
            }
        }
    }

    #[test]
    fn normalization_inverts(rows in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 7), 2..40)) {
        let norm = Normalization::fit(&rows).unwrap();
        for r in &rows {
            let back = norm.invert(&norm.apply(r));
            for (x, y) in r.iter().zip(&back) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
