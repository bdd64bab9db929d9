use ibirm_core::report::{aggregate, aggregate_report, dataset_to_csv, sweep_to_csv, write_atomic, Header};
use ibirm_core::sem::{generate_benchmark, make_test_env};
use ibirm_core::trainer::{random_search, sweep, Protocol, SweepSettings};
use ibirm_core::{Example, GeneratorSpec, Method, RngStream, Shift, XorVariant};

fn small(example: Example) -> GeneratorSpec {
    GeneratorSpec::new(example, 3).with_n(100)
}

fn settings() -> SweepSettings {
    SweepSettings {
        steps: 50,
        ..Default::default()
    }
}

#[test]
fn report_has_queries_times_seeds_rows_per_method() {
    let rep = sweep(
        &small(Example::Ex2),
        &[Method::Erm, Method::IbErm],
        Protocol { n_queries: 4, n_seeds: 3 },
        &settings(),
        &RngStream::root(1),
    )
    .unwrap();
    assert_eq!(rep.rows.len(), 4 * 3 * 2);
    assert_eq!(rep.selected().len(), 3 * 2);
}

#[test]
fn single_query_single_seed() {
    let rep = random_search(
        &small(Example::Ex3),
        Method::IbIrm,
        Protocol { n_queries: 1, n_seeds: 1 },
        &settings(),
        &RngStream::root(2),
    )
    .unwrap();
    assert_eq!(rep.rows.len(), 1);
    let r = &rep.rows[0];
    assert!(r.lambda > 0.0 && r.gamma > 0.0 && r.gamma <= 0.99);
}

#[test]
fn file_round_trip_matches_memory() {
    let rep = sweep(
        &small(Example::Ex1).scrambled(true),
        &Method::ALL,
        Protocol { n_queries: 3, n_seeds: 2 },
        &settings(),
        &RngStream::root(3),
    )
    .unwrap();
    let dir = std::env::temp_dir().join(format!("ibirm-pipeline-{}", std::process::id()));
    let path = dir.join("sweep.csv");
    write_atomic(&path, &sweep_to_csv(&rep, &Header::now(3, "t"))).unwrap();
    let from_disk = aggregate_report(&[&path]).unwrap();
    // Compare serialized tables: diverged seeds give NaN, which is never == itself.
    let h = Header::without_timestamp(3, "t");
    assert_eq!(from_disk.to_csv(&h), aggregate(&rep).to_csv(&h));
    assert!(from_disk.rows.iter().all(|r| r.example == "ex1s"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn every_example_generates_and_shifts() {
    let cases = [
        small(Example::Ex1),
        small(Example::Ex2).scrambled(true),
        small(Example::Ex3),
        small(Example::TwoD),
        small(Example::Xor).with_xor(XorVariant::BottleneckOnly),
        small(Example::Xor).with_xor(XorVariant::InvarianceOnly),
        small(Example::Xor),
    ];
    for spec in cases {
        let rng = RngStream::root(4);
        let (params, fw, envs) = generate_benchmark(&spec, &rng).unwrap();
        assert_eq!(envs.len(), 3);
        for (p, e) in params.iter().zip(&envs) {
            assert_eq!(e.dim(), spec.feature_dim());
            let t = make_test_env(&spec, p, &fw, Shift::ScrambleSpurious, &mut rng.fork("t")).unwrap();
            assert_eq!(t.dim(), e.dim());
            let csv = dataset_to_csv(e, &Header::without_timestamp(4, "t"));
            assert_eq!(csv.lines().count(), 1 + 1 + e.len());
        }
    }
}
