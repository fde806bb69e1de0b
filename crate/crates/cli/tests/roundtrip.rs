use proptest::prelude::*;
use qufti_cli::scenario::{OptimizerInput, SchemeName};
use qufti_cli::{format_number, parse_scenario, Cell, CsvTable, ScenarioInput, ScenarioSpec};

fn valid_spec() -> impl Strategy<Value = ScenarioSpec> {
    (
        2usize..9,
        1usize..4,
        any::<u64>(),
        1usize..64,
        prop::bool::ANY,
    )
        .prop_flat_map(|(m, k, seed, starts, with_grid)| {
            (
                Just((m, k, seed, starts)),
                1..m,
                1..=m,
                prop_oneof![
                    Just(SchemeName::Nrd),
                    Just(SchemeName::Spd),
                    Just(SchemeName::OneNrd)
                ],
                prop::collection::vec(0.0..=1.0f64, if with_grid { 1..5 } else { 0..1 }),
            )
        })
        .prop_flat_map(|((m, k, seed, starts), d, resolved, scheme, grid)| {
            (
                Just((m, k, seed, starts, d, resolved, scheme, grid)),
                prop::option::of(prop::collection::vec(-10.0..10.0f64, d)),
            )
        })
        .prop_map(
            |((m, k, seed, starts, d, resolved, scheme, grid), phases)| {
                ScenarioSpec::from_input(ScenarioInput {
                    m: Some(m),
                    d: Some(d),
                    k: Some(k),
                    scheme: Some(scheme),
                    resolved_mode: Some(resolved),
                    phases,
                    optimizer: Some(OptimizerInput {
                        starts: Some(starts),
                        seed: Some(seed),
                        max_iters: None,
                    }),
                    p_grid: (!grid.is_empty()).then_some(grid),
                    out: Some("run.csv".into()),
                    svg: None,
                })
                .unwrap()
            },
        )
}

proptest! {
    #[test]
    fn scenario_render_round_trips(spec in valid_spec()) {
        prop_assert_eq!(parse_scenario(&spec.render()).unwrap(), spec);
    }

    #[test]
    fn csv_cells_reparse(values in prop::collection::vec(-1e12..1e12f64, 1..20)) {
        let mut table = CsvTable::new(["v"]);
        for &v in &values {
            table.push(vec![Cell::Num(v)]).unwrap();
        }
        let csv = table.to_csv();
        for (line, v) in csv.lines().skip(1).zip(&values) {
            let back: f64 = line.parse().unwrap();
            prop_assert!((back - v).abs() <= 1e-14 * v.abs(), "{} vs {}", back, v);
        }
    }

    #[test]
    fn tiny_and_huge_numbers_reparse(mantissa in 1.0..10.0f64, exponent in -300i32..300) {
        let v = mantissa * 10f64.powi(exponent);
        let back: f64 = format_number(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 1e-14 * v.abs());
    }
}
