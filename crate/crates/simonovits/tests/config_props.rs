use proptest::prelude::*;
use simonovits::config::{ConstantsSpec, ExperimentConfig, Format, Output, Task};
use simonovits::lemmas::Lemma;
use simonovits_core::bounds::Constants;

fn config() -> impl Strategy<Value = ExperimentConfig> {
    (
        prop::collection::vec(3usize..40, 1..4),
        prop::option::of(prop::collection::vec(0.0f64..=1.0, 1..5)),
        prop::collection::vec(0.0f64..8.0, 1..5),
        1usize..100,
        any::<u64>(),
        any::<bool>(),
        0.01f64..0.3,
        any::<bool>(),
    )
        .prop_map(|(n_grid, p_grid, mult, trials, seed, json, alpha, lemma)| {
            let mut c = Constants::paper_defaults();
            c.alpha = alpha;
            ExperimentConfig {
                task: if lemma { Task::VerifyLemma } else { Task::ScanThreshold },
                pattern: "triangle".into(),
                n_grid,
                p_multipliers: if p_grid.is_none() { Some(mult) } else { None },
                p_grid,
                trials,
                seed,
                constants: if json { ConstantsSpec::Table(c) } else { ConstantsSpec::default() },
                lemma: lemma.then_some(Lemma::Sum),
                output: Output {
                    path: "out/result.csv".into(),
                    format: if json { Format::Json } else { Format::Csv },
                },
            }
        })
}

proptest! {
    #[test]
    fn toml_roundtrip_is_lossless(cfg in config()) {
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml(), text);
    }
}
