use dadg::data::{make_lodo_splits, BatchIterator, Domain, MultiDomainDataset, Protocol};
use dadg::grl::grl_backward;
use dadg::loss::{binary_domain_loss, cross_entropy};
use dadg::report::mean_std;
use dadg::tensor::Matrix;
use dadg::trainer::sample_episode;
use dadg::{RunConfig, Variant};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-50.0..50.0f64, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

fn dataset(sizes: Vec<usize>) -> MultiDomainDataset {
    let domains = sizes
        .iter()
        .enumerate()
        .map(|(d, &n)| Domain {
            name: format!("d{d}"),
            inputs: Matrix::from_vec(n, 1, vec![0.0; n]).unwrap(),
            labels: (0..n).map(|i| i % 2).collect(),
        })
        .collect();
    MultiDomainDataset::new(domains, vec!["a".into(), "b".into()], 1).unwrap()
}

proptest! {
    #[test]
    fn grl_backward_is_linear(a in matrix(3, 4), b in matrix(3, 4), lambda in -3.0..3.0f64, k in -4.0..4.0f64) {
        let sum = Matrix::from_vec(3, 4, a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| k * x + y).collect()).unwrap();
        let lhs = grl_backward(&sum, lambda);
        let (ga, gb) = (grl_backward(&a, lambda), grl_backward(&b, lambda));
        for ((l, x), y) in lhs.as_slice().iter().zip(ga.as_slice()).zip(gb.as_slice()) {
            prop_assert!((l - (k * x + y)).abs() <= 1e-9 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn cross_entropy_is_non_negative_and_shift_invariant(
        logits in matrix(6, 4),
        labels in prop::collection::vec(0usize..4, 6),
        shift in -100.0..100.0f64,
    ) {
        let ce = cross_entropy(&logits, &labels).unwrap();
        prop_assert!(ce >= 0.0 && ce.is_finite());
        let shifted = logits.map(|v| v + shift);
        prop_assert!((cross_entropy(&shifted, &labels).unwrap() - ce).abs() <= 1e-9 * (1.0 + ce));
    }

    #[test]
    fn domain_loss_is_non_negative(logits in matrix(5, 1), labels in prop::collection::vec(0u8..2, 5)) {
        let l = binary_domain_loss(&logits, &labels).unwrap();
        prop_assert!(l >= 0.0 && l.is_finite());
    }

    #[test]
    fn splits_partition_every_source(
        sizes in prop::collection::vec(2usize..60, 2..6),
        target in 0usize..6,
        seed in any::<u64>(),
        seventy_thirty in any::<bool>(),
    ) {
        let ds = dataset(sizes.clone());
        let target = target % sizes.len();
        let protocol = if seventy_thirty { Protocol::Vlcs7030 } else { Protocol::FullTarget };
        let plan = make_lodo_splits(&ds, &format!("d{target}"), protocol, seed).unwrap();
        prop_assert_eq!(plan.target_test.len(), sizes[target]);
        prop_assert_eq!(plan.sources.len(), sizes.len() - 1);
        for s in &plan.sources {
            prop_assert!(s.domain != target);
            let n = sizes[s.domain];
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            if seventy_thirty {
                prop_assert_eq!(s.train.len(), (7 * n + 5) / 10);
            } else {
                prop_assert!(s.test.is_empty());
            }
        }
    }

    #[test]
    fn one_epoch_visits_every_index_once(n in 1usize..80, batch in 1usize..20, seed in any::<u64>()) {
        let ds = dataset(vec![n]);
        let idx: Vec<usize> = (0..n).collect();
        let mut it = BatchIterator::new(&ds, 0, &idx, batch, ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut seen = Vec::new();
        while seen.len() < n {
            let b = it.next_batch();
            prop_assert!(!b.is_empty() && b.len() <= batch);
            seen.extend(b.provenance.iter().map(|&(_, i)| i));
        }
        seen.sort_unstable();
        prop_assert_eq!(seen, idx);
    }

    #[test]
    fn episodes_are_well_formed(sources in prop::collection::btree_set(0usize..10, 3..7), seed in any::<u64>()) {
        let sources: Vec<usize> = sources.into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let ep = sample_episode(&sources, &mut rng).unwrap();
            prop_assert!(sources.contains(&ep.s_c));
            prop_assert!(ep.s_d.iter().all(|d| sources.contains(d) && *d != ep.s_c));
            prop_assert!(ep.s_d[0] < ep.s_d[1]);
        }
    }

    #[test]
    fn mean_std_matches_a_two_pass_oracle(values in prop::collection::vec(-1e3..1e3f64, 1..30)) {
        let (m, s) = mean_std(&values).unwrap();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() < 2 { 0.0 } else { values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0) };
        prop_assert!((m - mean).abs() <= 1e-9);
        prop_assert!((s - var.sqrt()).abs() <= 1e-9);
        prop_assert!(s >= 0.0);
    }

    #[test]
    fn config_serialisation_is_a_fixed_point(
        alpha in 0.0..1.0f64,
        gamma in 0.0..1.0f64,
        iterations in 0usize..5000,
        seeds in prop::collection::vec(0u64..1000, 1..5),
        variants in prop::sample::subsequence(Variant::ALL.to_vec(), 1..=4),
        seventy_thirty in any::<bool>(),
        disc in prop::collection::vec(1usize..128, 0..3),
    ) {
        let mut cfg = RunConfig::from_toml_str("").unwrap();
        cfg.hyper.alpha = alpha;
        cfg.hyper.gamma = gamma;
        cfg.hyper.iterations = iterations;
        cfg.run.seeds = seeds;
        cfg.run.variants = variants;
        cfg.run.protocol = if seventy_thirty { Protocol::Vlcs7030 } else { Protocol::FullTarget };
        cfg.arch.disc_hidden = disc;
        let text = cfg.to_toml_string();
        let back = RunConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml_string(), text);
    }
}
