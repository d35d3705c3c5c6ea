use dadg::data::{
    generate_synthetic, make_lodo_splits, Domain, MultiDomainDataset, Protocol, SplitPlan, SyntheticSpec,
};
use dadg::eval::{accuracy_on, TrainedModel};
use dadg::model::{init_model, ArchSpec, Batch, ModelParams};
use dadg::tensor::Matrix;
use dadg::trainer::{
    sample_episode, stream_rng, train, train_variant_step, OptimizerState, StepBatches, TrainConfig, Trainer,
    STREAM_EPISODE,
};
use dadg::{Error, HyperParams, Variant};

fn spurious() -> MultiDomainDataset {
    generate_synthetic(&SyntheticSpec::spurious_shift(1)).unwrap()
}

fn small_arch(ds: &MultiDomainDataset) -> ArchSpec {
    ArchSpec::new(ds.input_dim(), 8, ds.num_classes())
        .with_extractor_hidden(vec![8])
        .with_disc_hidden(vec![8])
}

fn plan(ds: &MultiDomainDataset) -> SplitPlan {
    make_lodo_splits(ds, "reversed", Protocol::FullTarget, 0).unwrap()
}

fn config(ds: &MultiDomainDataset, variant: Variant, hp: HyperParams) -> TrainConfig {
    TrainConfig {
        arch: small_arch(ds),
        hp,
        variant,
    }
}

fn quick(iterations: usize) -> HyperParams {
    HyperParams {
        alpha: 0.01,
        beta: 0.01,
        gamma: 0.01,
        iterations,
        ..Default::default()
    }
}

#[test]
fn zero_step_sizes_leave_the_model_unchanged() {
    let ds = spurious();
    let hp = HyperParams {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
        iterations: 5,
        ..Default::default()
    };
    for variant in Variant::ALL {
        let tc = config(&ds, variant, hp.clone());
        let out = train::<f64>(&tc, &ds, &plan(&ds), 4).unwrap();
        let init: ModelParams<f64> = init_model(&tc.arch, 4).unwrap();
        assert_eq!(out.model.theta, init.theta, "{variant}");
        assert_eq!(out.model.phi, init.phi, "{variant}");
        if variant.uses_discriminator() {
            assert_eq!(out.model.psi, init.psi, "{variant}");
        }
    }
}

#[test]
fn one_iteration_reports_finite_non_negative_losses() {
    let ds = spurious();
    let mut t = Trainer::<f64>::new(config(&ds, Variant::Dadg, quick(1)), &ds, &plan(&ds), 2).unwrap();
    let r = t.step().unwrap().clone();
    for v in [r.loss_f(), r.loss_g(), r.loss_h()] {
        let v = v.expect("all three losses are reported");
        assert!(v.is_finite() && v >= 0.0, "{v}");
    }
    let acc = r.disc_accuracy().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn identical_seeds_give_bitwise_identical_runs() {
    let ds = spurious();
    for variant in Variant::ALL {
        let tc = config(&ds, variant, quick(30));
        let a = train::<f64>(&tc, &ds, &plan(&ds), 9).unwrap();
        let b = train::<f64>(&tc, &ds, &plan(&ds), 9).unwrap();
        assert_eq!(a.model, b.model, "{variant}");
        assert_eq!(a.history, b.history, "{variant}");
        let c = train::<f64>(&tc, &ds, &plan(&ds), 10).unwrap();
        assert_ne!(a.model.theta, c.model.theta, "{variant}");
    }
}

#[test]
fn variants_only_touch_their_own_components() {
    let ds = spurious();
    let run = |v| train::<f64>(&config(&ds, v, quick(10)), &ds, &plan(&ds), 3).unwrap();

    let deepall = run(Variant::DeepAll);
    assert!(deepall.model.psi.is_none(), "deepall never allocates a discriminator");
    assert!(deepall.history.reports.iter().all(|r| r.dal.is_none() && r.meta.is_none() && r.episode.is_none()));

    let dal = run(Variant::DadgDal);
    assert!(dal.history.reports.iter().all(|r| r.dal.is_some() && r.loss_h().is_none()));

    let cdv = run(Variant::DadgCdv);
    assert!(cdv.model.psi.is_none());
    assert!(cdv.history.reports.iter().all(|r| r.loss_f().is_none() && r.loss_h().is_some()));
}

fn labelled(batch: &Batch, label: u8) -> Batch {
    Batch {
        domain_labels: vec![label; batch.len()],
        ..batch.clone()
    }
}

#[test]
fn dal_ablation_with_zero_alpha_equals_deepall_on_the_same_batches() {
    let ds = spurious();
    let arch = small_arch(&ds);
    let ep = dadg::meta::check_episode(&arch, 2, 16);
    let (a, b) = (labelled(&ep.train[0], 0), labelled(&ep.train[1], 1));
    let hp = HyperParams {
        alpha: 0.0,
        gamma: 0.05,
        ..Default::default()
    };
    let model: ModelParams<f64> = init_model(&arch, 12).unwrap();
    let with_dal = StepBatches {
        dal: Some((a.clone(), b.clone())),
        train: vec![a.clone(), b.clone()],
        val: None,
    };
    let plain = StepBatches {
        dal: None,
        train: vec![a, b],
        val: None,
    };
    let (x, _) = train_variant_step(Variant::DadgDal, &arch, &model, &with_dal, &hp, &mut OptimizerState::new(&hp)).unwrap();
    let no_psi = ModelParams { psi: None, ..model.clone() };
    let (y, _) = train_variant_step(Variant::DeepAll, &arch, &no_psi, &plain, &hp, &mut OptimizerState::new(&hp)).unwrap();
    assert_eq!(x.theta, y.theta);
    assert_eq!(x.phi, y.phi);
    assert_ne!(x.theta, model.theta);
}

#[test]
fn zero_lambda_dadg_moves_theta_and_phi_exactly_like_the_cdv_ablation() {
    let ds = spurious();
    let hp = HyperParams {
        lambda: 0.0,
        ..quick(25)
    };
    let full = train::<f64>(&config(&ds, Variant::Dadg, hp.clone()), &ds, &plan(&ds), 6).unwrap();
    let cdv = train::<f64>(&config(&ds, Variant::DadgCdv, hp), &ds, &plan(&ds), 6).unwrap();
    assert_eq!(full.model.theta, cdv.model.theta);
    assert_eq!(full.model.phi, cdv.model.phi);
    // the discriminator still learns on its own
    let init: ModelParams<f64> = init_model(&small_arch(&ds), 6).unwrap();
    assert_ne!(full.model.psi, init.psi);
}

#[test]
fn zero_iterations_return_the_initial_model() {
    let ds = spurious();
    let tc = config(&ds, Variant::Dadg, quick(0));
    let out = train::<f64>(&tc, &ds, &plan(&ds), 5).unwrap();
    assert_eq!(out.model, init_model(&tc.arch, 5).unwrap());
    assert!(out.history.reports.is_empty());
}

#[test]
fn deepall_fits_a_separable_single_source() {
    let n = 200;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let y = i % 2;
        let t = i as f64 / n as f64;
        let sign = if y == 1 { 1.0 } else { -1.0 };
        rows.extend([sign * (0.5 + t), (7.0 * t).sin()]);
        labels.push(y);
    }
    let domain = |name: &str| Domain {
        name: name.into(),
        inputs: Matrix::from_vec(n, 2, rows.clone()).unwrap(),
        labels: labels.clone(),
    };
    let ds = MultiDomainDataset::new(vec![domain("only"), domain("unused")], vec!["a".into(), "b".into()], 2).unwrap();
    let plan = make_lodo_splits(&ds, "unused", Protocol::FullTarget, 0).unwrap();
    let tc = TrainConfig {
        arch: ArchSpec::new(2, 8, 2),
        hp: HyperParams {
            gamma: 0.05,
            iterations: 300,
            ..Default::default()
        },
        variant: Variant::DeepAll,
    };
    let out = train::<f64>(&tc, &ds, &plan, 1).unwrap();
    let model = TrainedModel {
        arch: tc.arch,
        params: out.model,
    };
    let acc = accuracy_on(&model, &ds, 0, &plan.sources[0].train).unwrap();
    assert!(acc >= 0.95, "training accuracy {acc}");
}

#[test]
fn episodes_over_four_sources_are_uniform() {
    let mut rng = stream_rng(8, STREAM_EPISODE);
    let mut s_c = [0usize; 4];
    let mut pairs = std::collections::BTreeMap::new();
    for _ in 0..6000 {
        let ep = sample_episode(&[0, 1, 2, 3], &mut rng).unwrap();
        assert!(!ep.s_d.contains(&ep.s_c) && ep.s_d[0] != ep.s_d[1]);
        s_c[ep.s_c] += 1;
        *pairs.entry(ep.s_d).or_insert(0usize) += 1;
    }
    assert!(s_c.iter().all(|&c| c.abs_diff(1500) <= 150), "{s_c:?}");
    assert_eq!(pairs.len(), 6);
    assert!(pairs.values().all(|&c| c.abs_diff(1000) <= 150), "{pairs:?}");
}

#[test]
fn too_few_sources_are_rejected_per_variant() {
    let ds = spurious();
    let two = plan(&ds).restrict_sources(&[0, 1]);
    for (variant, ok) in [
        (Variant::DeepAll, true),
        (Variant::DadgDal, true),
        (Variant::DadgCdv, false),
        (Variant::Dadg, false),
    ] {
        let r = Trainer::<f64>::new(config(&ds, variant, quick(1)), &ds, &two, 0);
        assert_eq!(r.is_ok(), ok, "{variant}");
    }
}

#[test]
fn divergence_reports_the_iteration() {
    let ds = spurious();
    let hp = HyperParams {
        alpha: 1e8,
        iterations: 50,
        ..Default::default()
    };
    match train::<f64>(&config(&ds, Variant::DadgDal, hp), &ds, &plan(&ds), 0) {
        Err(Error::Diverged { iteration, detail }) => {
            assert!(iteration < 50);
            assert!(detail.contains("non-finite") || detail.contains("NaN") || detail.contains("inf"), "{detail}");
        }
        other => panic!("expected divergence, got {:?}", other.map(|o| o.history.reports.len())),
    }
}

#[test]
fn default_hyperparameters_stay_finite_on_bundled_datasets() {
    for spec in [SyntheticSpec::rotated_moons(0), SyntheticSpec::spurious_shift(0)] {
        let ds = generate_synthetic(&spec).unwrap();
        let target = ds.domain_names()[3].to_string();
        let plan = make_lodo_splits(&ds, &target, Protocol::FullTarget, 0).unwrap();
        let tc = TrainConfig {
            arch: dadg::config::ArchConfig::default().build(ds.input_dim(), ds.num_classes()),
            hp: HyperParams {
                iterations: 20,
                ..Default::default()
            },
            variant: Variant::Dadg,
        };
        let out = train::<f64>(&tc, &ds, &plan, 0).unwrap();
        for r in &out.history.reports {
            for v in [r.loss_f(), r.loss_g(), r.loss_h()].into_iter().flatten() {
                assert!(v.is_finite());
            }
        }
    }
}

#[test]
fn f32_precision_trains_too() {
    let ds = spurious();
    let out = train::<f32>(&config(&ds, Variant::Dadg, quick(20)), &ds, &plan(&ds), 1).unwrap();
    assert!(out.model.all_finite());
    assert_eq!(out.history.reports.len(), 20);
}
