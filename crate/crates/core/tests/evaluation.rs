mod common;

use common::repo_root;
use digit_reward::classifier::{AblationMode, Classifier};
use digit_reward::config::LoadedConfig;
use digit_reward::eval::{compare_modes, evaluate, reference_inputs, run_mode, ModeInputs};
use digit_reward::imagery::{load_templates, DatasetSplit, LabeledImage, DIGITS};
use digit_reward::model::Model;
use digit_reward::pipeline::{self, Trained};
use digit_reward::Error;

fn small() -> (LoadedConfig, Trained) {
    let mut cfg = LoadedConfig::load(repo_root().join("configs/desk.json")).unwrap();
    cfg.config.per_digit_cap = 30;
    let trained = pipeline::train(&cfg).unwrap();
    (cfg, trained)
}

#[test]
fn templates_as_test_set_score_perfectly() {
    let (cfg, trained) = small();
    let templates = load_templates(cfg.template_dir()).unwrap();
    let mut split = trained.split.clone();
    split.test = (0..DIGITS)
        .map(|d| {
            templates
                .digit(d)
                .iter()
                .enumerate()
                .map(|(i, f)| LabeledImage::new(f.image.clone(), d as u8, 90_000 + i).unwrap())
                .collect()
        })
        .collect();
    // fonts alone, so an exact template hit dominates
    let mut model = trained.model.clone();
    for pool in &mut model.pools {
        pool.selected.clear();
    }
    let report = evaluate(AblationMode::Full, &split, &model, &cfg.config).unwrap();
    assert_eq!(report.accuracy, Some(1.0));
    assert_eq!(report.samples, split.test_len());
}

#[test]
fn empty_test_set_reports_null_accuracy() {
    let (cfg, trained) = small();
    let split = DatasetSplit {
        test: vec![Vec::new(); DIGITS],
        ..trained.split.clone()
    };
    for r in compare_modes(&split, &trained.model, &cfg.config).unwrap() {
        assert_eq!(r.samples, 0);
        assert_eq!(r.accuracy, None);
    }
}

#[test]
fn four_reports_with_consistent_counts() {
    let (cfg, trained) = small();
    let reports = compare_modes(&trained.split, &trained.model, &cfg.config).unwrap();
    assert_eq!(reports.iter().map(|r| r.mode).collect::<Vec<_>>(), AblationMode::ALL.to_vec());
    for r in &reports {
        assert_eq!(r.samples, trained.split.test_len());
        for d in 0..DIGITS {
            assert_eq!(r.confusion[d].iter().sum::<u64>() as usize, trained.split.test[d].len());
        }
        let trace: u64 = (0..DIGITS).map(|d| r.confusion[d][d]).sum();
        assert_eq!(r.accuracy, Some(trace as f64 / r.samples as f64));
    }
}

#[test]
fn stale_model_is_refused() {
    let (cfg, trained) = small();
    let mut other = cfg.config.clone();
    other.selection.threshold = 0.45;
    assert!(matches!(
        compare_modes(&trained.split, &trained.model, &other),
        Err(Error::StaleModel { .. })
    ));
}

#[test]
fn unweighted_reference_modes_differ_only_by_weights() {
    let (cfg, trained) = small();
    let reference = reference_inputs(&trained.split, &trained.model.pools, &cfg.config).unwrap();
    for (d, pool) in reference.pools.iter().enumerate() {
        assert_eq!(pool.selected.len(), trained.split.train[d].len());
    }
    let ones = ModeInputs {
        pools: reference.pools.clone(),
        tables: reference
            .tables
            .iter()
            .map(|t| t.as_ref().map(|t| t.map_weights(|_| 1.0)))
            .collect(),
    };
    let settings = cfg.config.classifier_settings();
    let fp = &trained.model.fingerprint;
    let ssim_only = run_mode(AblationMode::SsimOnly, &trained.split.test, &reference, settings, fp).unwrap();
    let fuzzy_flat = run_mode(AblationMode::FuzzyOnly, &trained.split.test, &ones, settings, fp).unwrap();
    assert!(ssim_only.same_outcome(&fuzzy_flat));
}

#[test]
fn fallback_to_fonts_never_errors() {
    let (cfg, trained) = small();
    let mut model = trained.model.clone();
    for pool in &mut model.pools {
        pool.selected.clear();
    }
    model.tables = vec![None; DIGITS];
    let report = evaluate(AblationMode::Full, &trained.split, &model, &cfg.config).unwrap();
    assert_eq!(report.samples, trained.split.test_len());
}

#[test]
fn uncertain_flag_is_monotone_in_threshold() {
    let (cfg, trained) = small();
    let mut previous: Option<Vec<bool>> = None;
    for margin in [0.0, 0.01, 0.05, 0.1, 0.3] {
        let mut settings = cfg.config.classifier_settings();
        settings.margin_threshold = margin;
        let c = Classifier::new(&trained.model.pools, &trained.model.tables, AblationMode::Full, settings).unwrap();
        let flags: Vec<bool> = trained
            .split
            .test
            .iter()
            .flatten()
            .map(|s| c.classify(&s.image).unwrap().uncertain)
            .collect();
        if let Some(prev) = &previous {
            assert!(prev.iter().zip(&flags).all(|(&before, &now)| !before || now));
        }
        previous = Some(flags);
    }
}

#[test]
fn classify_is_repeatable() {
    let (_, trained) = small();
    let settings = trained.model.config.classifier_settings();
    let c = Classifier::new(&trained.model.pools, &trained.model.tables, AblationMode::Full, settings).unwrap();
    let sample = &trained.split.test[3][0].image;
    let a = c.classify(sample).unwrap();
    let b = c.classify(sample).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn trained_model_reloads_identically() {
    let (cfg, trained) = small();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    trained.model.save(&path).unwrap();
    let back = Model::load(&path).unwrap();
    assert_eq!(back, trained.model);
    assert!(back.check_fingerprint(&cfg.config).is_ok());
}

#[test]
fn evaluation_order_does_not_matter() {
    let (cfg, trained) = small();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let serial = one.install(|| compare_modes(&trained.split, &trained.model, &cfg.config)).unwrap();
    let parallel = four.install(|| compare_modes(&trained.split, &trained.model, &cfg.config)).unwrap();
    for (a, b) in serial.iter().zip(&parallel) {
        assert!(a.same_outcome(b));
    }
    let mut reversed = trained.split.clone();
    for digit in &mut reversed.test {
        digit.reverse();
    }
    let flipped = compare_modes(&reversed, &trained.model, &cfg.config).unwrap();
    for (a, b) in serial.iter().zip(&flipped) {
        assert!(a.same_outcome(b));
    }
}
