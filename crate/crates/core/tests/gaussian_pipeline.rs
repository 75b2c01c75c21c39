use causal_local::ci::{CiSession, Dataset, GaussianTest, GaussianTestConfig, OracleTest};
use causal_local::local::{learn_local, BackgroundKnowledge, LearnOptions};
use causal_local::sim::{random_dag_with_edges, rng_from_seed, sample_background, Sem, DEFAULT_WEIGHT_RANGE};

#[test]
fn large_sample_matches_the_oracle() {
    let mut agree = 0;
    for seed in 0..10 {
        let mut rng = rng_from_seed(seed);
        let dag = random_dag_with_edges(8, 9, &mut rng).unwrap();
        let k = sample_background(&dag, 0.5, &mut rng).unwrap();
        let sem = Sem::random(dag.clone(), DEFAULT_WEIGHT_RANGE, &mut rng).unwrap();
        let data = sem.sample(20_000, &mut rng).unwrap();

        // The CSV round trip is part of the pipeline under test.
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let data = Dataset::from_csv_reader(buf.as_slice()).unwrap();
        let cfg = GaussianTestConfig::new(data.correlation().unwrap(), data.n_samples()).with_alpha(0.001);
        let gauss = GaussianTest::new(cfg).unwrap();
        let oracle = OracleTest::new(dag);

        let x = (seed % 8) as usize;
        let learned = learn_local(x, &CiSession::new(&gauss), &k, &LearnOptions::lenient()).unwrap();
        let truth = learn_local(x, &CiSession::new(&oracle), &k, &LearnOptions::default()).unwrap();
        if learned.parents(x) == truth.parents(x)
            && learned.children(x) == truth.children(x)
            && learned.siblings(x) == truth.siblings(x)
        {
            agree += 1;
        }
    }
    assert!(agree >= 8, "{agree} of 10 local structures recovered");
}

#[test]
fn empty_knowledge_is_accepted_by_every_learner() {
    let dag = random_dag_with_edges(6, 6, &mut rng_from_seed(1)).unwrap();
    let oracle = OracleTest::new(dag);
    let s = CiSession::new(&oracle);
    let ls = learn_local(0, &s, &BackgroundKnowledge::default(), &LearnOptions::default()).unwrap();
    assert!(ls.dcc.is_empty());
    assert_eq!(ls.ci_tests, s.count());
}
