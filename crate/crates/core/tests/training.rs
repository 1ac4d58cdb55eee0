use geoqugan::ansatz::TopologyVariant;
use geoqugan::dataset::{build_dataset, synthetic_airports, weights_of, DatasetConfig};
use geoqugan::k4::EdgeWeights;
use geoqugan::metrics::{mean_sample_std, BootstrapConfig, MetricConfig};
use geoqugan::nets::{Adam, Mlp, MlpSpec};
use geoqugan::trainer::{
    generator_objective, sample_latents, train, Generator, GeneratorKind, TrainConfig, Trainer,
    MODEL_PRESETS,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(n: usize) -> Vec<EdgeWeights> {
    let airports = synthetic_airports(400, 3);
    let cfg = DatasetConfig { n_quadruples: n, seed: 3, ..Default::default() };
    weights_of(&build_dataset(&airports, &cfg).unwrap())
}

fn quick(cfg: TrainConfig) -> TrainConfig {
    TrainConfig {
        batch_size: 16,
        eval_samples: 64,
        final_eval_samples: 128,
        metrics: MetricConfig {
            bootstrap: BootstrapConfig { resamples: 50, ..Default::default() },
            ..Default::default()
        },
        ..cfg
    }
}

#[test]
fn one_epoch_smoke_for_every_model() {
    let real = data(64);
    for preset in MODEL_PRESETS {
        let cfg = quick(TrainConfig { epochs: 1, ..preset.config() });
        let out = train(&cfg, &real).unwrap_or_else(|e| panic!("{}: {e}", preset.name));
        assert_eq!(out.log.records().len(), cfg.eval_epochs().len(), "{}", preset.name);
        assert!(out.log.records().iter().all(|r| r.is_finite()), "{}", preset.name);
        assert!(out.report.is_finite(), "{}", preset.name);
    }
}

#[test]
fn log_has_configured_records_in_order() {
    let real = data(64);
    let cfg = quick(TrainConfig { epochs: 7, eval_every: 3, ..Default::default() });
    let out = train(&cfg, &real).unwrap();
    let epochs: Vec<usize> = out.log.records().iter().map(|r| r.epoch).collect();
    assert_eq!(epochs, vec![1, 3, 6, 7]);
}

#[test]
fn same_seed_same_run_different_seed_different_run() {
    let real = data(64);
    let cfg = quick(TrainConfig {
        epochs: 2,
        generator: GeneratorKind::Quantum(TopologyVariant::TriangleCyclicCrot),
        scaling_head: true,
        variance_regularizer: true,
        ..Default::default()
    });
    let a = train(&cfg, &real).unwrap();
    let b = train(&cfg, &real).unwrap();
    assert_eq!(a.log.to_csv().unwrap(), b.log.to_csv().unwrap());
    assert_eq!(
        serde_json::to_string(&a.report).unwrap(),
        serde_json::to_string(&b.report).unwrap()
    );
    assert_eq!(a.generator, b.generator);

    let c = train(&TrainConfig { seed: 1, ..cfg }, &real).unwrap();
    assert_ne!(a.log, c.log);
}

#[test]
fn generated_samples_stay_on_simplex() {
    let real = data(64);
    for generator in [
        GeneratorKind::Classical,
        GeneratorKind::Quantum(TopologyVariant::Combined),
    ] {
        let out = train(&quick(TrainConfig { epochs: 3, generator, ..Default::default() }), &real)
            .unwrap();
        for w in &out.samples {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(w.iter().all(|&x| x >= 0.0));
        }
    }
}

/// Central differences of the full objective w.r.t. every trainable value.
fn fd_gradient(
    gen: &Generator,
    disc: &Mlp,
    zs: &[[f64; 6]],
    cfg: &TrainConfig,
    target: f64,
    h: f64,
) -> Vec<f64> {
    let base = gen.trainable();
    (0..base.len())
        .map(|i| {
            let eval = |delta: f64| {
                let mut g = gen.clone();
                let mut t = base.clone();
                t[i] += delta;
                g.set_trainable(&t).unwrap();
                generator_objective(&g, disc, zs, cfg, target).unwrap().loss
            };
            (eval(h) - eval(-h)) / (2.0 * h)
        })
        .collect()
}

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1e-12)
}

#[test]
fn hybrid_chain_rule_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let disc = Mlp::init(MlpSpec::discriminator(&[32, 16, 8]).unwrap(), &mut rng);
    for (k, generator) in [
        GeneratorKind::Classical,
        GeneratorKind::Quantum(TopologyVariant::Triangle),
        GeneratorKind::Quantum(TopologyVariant::TriangleNoncyclicCrot),
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = TrainConfig {
            generator,
            scaling_head: k == 2,
            variance_regularizer: true,
            lambda: 50.0,
            rotation_init_std: 1.0,
            entangler_init_std: 1.0,
            ..Default::default()
        };
        let gen = Generator::init(&cfg, &[], &mut rng).unwrap();
        let zs = sample_latents(&mut rng, 3);
        let obj = generator_objective(&gen, &disc, &zs, &cfg, 0.07).unwrap();
        let fd = fd_gradient(&gen, &disc, &zs, &cfg, 0.07, 1e-5);
        let err = rel_error(&obj.grad, &fd);
        assert!(err < 1e-5, "{generator:?}: relative error {err:e}");
    }
}

#[test]
fn huge_lambda_drives_sigma_to_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let real = data(64);
    let target = mean_sample_std(&real);
    let cfg = TrainConfig { variance_regularizer: true, lambda: 1e7, ..Default::default() };
    let mut gen = Generator::init(&cfg, &real, &mut rng).unwrap();
    let disc = Mlp::init(MlpSpec::discriminator(&cfg.discriminator_hidden).unwrap(), &mut rng);
    let zs = sample_latents(&mut rng, 64);
    let mut adam = Adam::new(gen.num_trainable(), cfg.lr_g);
    let mut gaps = Vec::new();
    for _ in 0..50 {
        let obj = generator_objective(&gen, &disc, &zs, &cfg, target).unwrap();
        gaps.push((obj.sigma_batch - target).abs());
        let mut t = gen.trainable();
        adam.step(&mut t, &obj.grad).unwrap();
        gen.set_trainable(&t).unwrap();
    }
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "gap rose: {gaps:?}");
    }
}

#[test]
fn classical_discriminator_balanced_output_near_half() {
    let real = data(512);
    let cfg = quick(TrainConfig {
        generator: GeneratorKind::Classical,
        epochs: 40,
        batch_size: 64,
        ..Default::default()
    });
    let mut t = Trainer::new(cfg, &real).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let zs = sample_latents(&mut rng, 256);
    let mut balanced = Vec::new();
    while !t.is_finished() {
        t.step_epoch().unwrap();
        let fake = t.generator().generate_batch(&zs).unwrap();
        let d = |x: &EdgeWeights| t.discriminator().forward(x).unwrap().0[0];
        let total: f64 = real[..256].iter().chain(&fake).map(d).sum();
        balanced.push(total / 512.0);
    }
    let tail = balanced[balanced.len() - 10..].iter().sum::<f64>() / 10.0;
    assert!((tail - 0.5).abs() < 0.1, "{balanced:?}");
}
