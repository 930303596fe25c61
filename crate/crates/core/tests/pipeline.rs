use powercycle::absorbing::{
    absorb_leftover, build_absorbing_path, build_connector_reservoir, find_absorbers, find_connectors,
    greedy_path_cover, is_absorber, run_pipeline, PathSystem, PipelineConfig, PipelineOutcome, StageBudget,
    STAGE_HARVEST, STAGE_RESERVOIR,
};
use powercycle::hosts::{codegree_host, theorem_codegree_target};
use powercycle::power::{is_labelled_power_path, is_power_hamilton_cycle, power_path, Parameters, PowerPathInstance};
use powercycle::random::RngStream;
use powercycle::KGraph;

fn order_of(outcome: &PipelineOutcome) -> Option<&[usize]> {
    match outcome {
        PipelineOutcome::Success { order } => Some(order),
        PipelineOutcome::Failure(_) => None,
    }
}

#[test]
fn complete_hosts_succeed_with_random_rounds() {
    let cfg = PipelineConfig::default();
    for (k, r, n, p) in [(2, 1, 20, 0.1), (2, 2, 30, 0.05), (3, 1, 26, 0.02)] {
        let host = KGraph::complete(k, n).unwrap();
        for seed in 0..3 {
            let rep = run_pipeline(&host, r, p, &cfg, &mut RngStream::new(seed, 1)).unwrap();
            let order = order_of(&rep.outcome).unwrap_or_else(|| panic!("{:?}", rep.outcome));
            assert_eq!(order.len(), n);
            assert!(is_power_hamilton_cycle(&host, r, order).unwrap());
        }
    }
}

#[test]
fn failures_name_their_stage() {
    let cfg = PipelineConfig::default();
    let rep = run_pipeline(&KGraph::empty(3, 30).unwrap(), 1, 0.0, &cfg, &mut RngStream::new(0, 0)).unwrap();
    match rep.outcome {
        PipelineOutcome::Failure(f) => assert_eq!(f.stage, STAGE_HARVEST),
        other => panic!("{other:?}"),
    }
    let budget = StageBudget::default();
    let err = build_connector_reservoir(
        &KGraph::empty(2, 20).unwrap(),
        1,
        &(0..20).collect::<Vec<_>>(),
        3,
        1,
        1.0,
        &budget,
        &mut RngStream::new(0, 0),
    )
    .unwrap_err();
    assert_eq!(err.stage, STAGE_RESERVOIR);
}

#[test]
fn absorbers_and_connectors_are_verified() {
    let budget = StageBudget::default();
    let mut rng = RngStream::new(4, 0);
    let g = KGraph::complete(2, 9).unwrap();
    for t in find_absorbers(&g, 1, 0, 10, &budget, &mut rng).unwrap() {
        assert!(is_absorber(&g, 1, &t, 0).unwrap());
        assert!(!t.contains(&0));
    }
    assert!(
        find_absorbers(&KGraph::empty(2, 9).unwrap(), 1, 0, 10, &budget, &mut rng)
            .unwrap()
            .is_empty()
    );

    // A power path on 4h vertices connects its own ends through its middle.
    let (k, r) = (2, 2);
    let h = k + r - 1;
    let p = power_path(k, r, 4 * h).unwrap();
    let a: Vec<usize> = (0..h).collect();
    let b: Vec<usize> = (3 * h..4 * h).collect();
    let found = find_connectors(&p, r, &a, &b, 5, &budget, &mut rng).unwrap();
    assert!(found.contains(&(h..3 * h).collect::<Vec<_>>()));
    assert!(find_connectors(&KGraph::empty(2, 12).unwrap(), r, &a, &b, 1, &budget, &mut rng).is_err());
    assert!(find_connectors(&p, r, &a, &a, 1, &budget, &mut rng).is_err());
}

/// Splicing a vertex into any registered absorber keeps a power path, and
/// absorbing never moves the ends.
#[test]
fn registry_splices_and_end_preservation() {
    let budget = StageBudget::default();
    for (k, r, n) in [(2, 1, 24), (2, 2, 30), (3, 1, 28)] {
        let g = KGraph::complete(k, n).unwrap();
        let h = k + r - 1;
        for seed in 0..3 {
            let abs = build_absorbing_path(&g, r, 1, &budget, &mut RngStream::new(seed, 9)).unwrap();
            assert!(abs.path.verify(&g).unwrap());
            for (&v, list) in &abs.registry.per_vertex {
                assert!(!list.is_empty());
                for a in list {
                    assert_eq!(&abs.path.order[a.offset..a.offset + 2 * h], &a.tuple[..]);
                    let mut spliced = a.tuple.clone();
                    spliced.insert(h, v);
                    assert!(is_labelled_power_path(&g, r, &spliced).unwrap());
                }
            }
            let leftover: Vec<usize> = abs.registry.per_vertex.keys().copied().take(1).collect();
            let out = absorb_leftover(&abs.path, &abs.registry, &leftover, &g).unwrap();
            assert_eq!((out.start(), out.end()), (abs.path.start(), abs.path.end()));
            assert_eq!(out.len(), abs.path.len() + leftover.len());
        }
    }
}

#[test]
fn path_systems_stay_disjoint() {
    let params = Parameters::new(2, 1).unwrap();
    let mut s = PathSystem::default();
    s.push(PowerPathInstance::new(params, vec![0, 1, 2]).unwrap()).unwrap();
    assert!(s.push(PowerPathInstance::new(params, vec![3, 2]).unwrap()).is_err());
    let budget = StageBudget::default();
    let g = KGraph::complete(2, 17).unwrap();
    let (cover, leftover) = greedy_path_cover(&g, 1, &[0, 1], 4, None, &budget, &mut RngStream::new(1, 1)).unwrap();
    assert!(cover.verify(&g).unwrap());
    assert!(!cover.used_vertices.contains(&0) && !cover.used_vertices.contains(&1));
    assert!(leftover.len() < 4);
    assert_eq!(cover.used_vertices.len() + leftover.len() + 2, 17);
    let (none, all) = greedy_path_cover(
        &KGraph::empty(2, 9).unwrap(),
        1,
        &[],
        4,
        None,
        &budget,
        &mut RngStream::new(1, 1),
    )
    .unwrap();
    assert!(none.is_empty());
    assert_eq!(all.len(), 9);
}

/// Success rate on a codegree host at the theorem bound is non-decreasing in
/// p up to two binomial standard errors. The asymptotic selection rate q is
/// about 1e-10 here, so candidates are all kept (q = 1).
#[test]
fn success_rate_grows_with_p() {
    let (k, r, n, seeds) = (2, 2, 30, 50u64);
    let params = Parameters::new(k, r).unwrap();
    let target = theorem_codegree_target(&params, n, 0.1);
    let (host, _) = codegree_host(k, n, target, &mut RngStream::new(2024, 0), 5).unwrap();
    assert!(host.min_codegree().unwrap() >= target);
    let cfg = PipelineConfig {
        selection_q_override: Some(1.0),
        ..PipelineConfig::default()
    };
    let complete = KGraph::complete(k, n).unwrap();
    let mut rates = Vec::new();
    for p in [0.05, 0.2, 0.5, 1.0] {
        let mut wins = 0;
        for seed in 0..seeds {
            let rep = run_pipeline(&host, r, p, &cfg, &mut RngStream::new(seed, 77)).unwrap();
            if let Some(order) = order_of(&rep.outcome) {
                assert!(is_power_hamilton_cycle(&complete, r, order).unwrap());
                wins += 1;
            }
        }
        rates.push(wins as f64 / seeds as f64);
    }
    println!("success rates at p = 0.05, 0.2, 0.5, 1.0: {rates:?}");
    let se = |x: f64| (x * (1.0 - x) / seeds as f64).sqrt();
    for w in rates.windows(2) {
        assert!(w[1] + 2.0 * (se(w[0]) + se(w[1])) >= w[0], "{rates:?}");
    }
    // At p = 1 the union is complete.
    assert_eq!(rates[3], 1.0);
}
