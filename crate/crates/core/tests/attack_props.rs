mod common;

use std::collections::BTreeSet;

use dfljam_core::attack::{
    attack_all, deploy_degree, deploy_mincut, is_covered, mcba_s1, mcba_s2, ndba_s1, ndba_s2, random_s1, LinkRank,
};
use dfljam_core::graph::{global_min_cut_undirected, Link};
use dfljam_core::seed::SimRng;
use proptest::prelude::*;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ndba_s1_takes_a_prefix_of_the_ranking(topo in common::connected_graph(10), budget in 0usize..12) {
        let degrees = topo.degrees();
        let mut ranked: Vec<LinkRank> = topo.links().iter().map(|&l| LinkRank::new(l, &degrees)).collect();
        ranked.sort();
        let expected: BTreeSet<Link> = ranked.iter().take(budget).map(|r| r.link).collect();
        let plan = ndba_s1(&topo, budget);
        prop_assert_eq!(&plan.jammed_links, &expected);
        prop_assert_eq!(plan.budget_used, expected.len());
        plan.validate(&topo, None).unwrap();
    }

    #[test]
    fn mcba_s1_with_cut_budget_disconnects(topo in common::connected_graph(10), extra in 0usize..4) {
        let cut = global_min_cut_undirected(&topo).unwrap();
        let plan = mcba_s1(&topo, cut.weight + extra).unwrap();
        prop_assert!(topo.residual_components(&plan.jammed_links).len() >= 2);
        prop_assert!(plan.jammed_links.len() <= cut.weight + extra);
    }

    #[test]
    fn s1_plans_block_both_directions(topo in common::connected_graph(8), budget in 0usize..8, seed in any::<u64>()) {
        let plans = [
            ndba_s1(&topo, budget),
            mcba_s1(&topo, budget).unwrap(),
            random_s1(&topo, budget, &mut SimRng::seed_from_u64(seed)),
            attack_all(&topo),
        ];
        for plan in &plans {
            for l in topo.links() {
                prop_assert_eq!(plan.blocks(l.lo(), l.hi()), plan.blocks(l.hi(), l.lo()));
                prop_assert_eq!(plan.blocks(l.lo(), l.hi()), plan.jammed_links.contains(l));
            }
        }
    }

    #[test]
    fn s2_arcs_only_reach_covered_receivers(topo in common::connected_graph(8), budget in 0usize..10, range in 100.0f64..600.0) {
        let placements = [
            deploy_degree(&topo, 2, range).unwrap(),
            deploy_mincut(&topo, 2, range).unwrap(),
        ];
        let plans = [
            ndba_s2(&topo, &placements[0], budget),
            mcba_s2(&topo, &placements[1], budget).unwrap(),
        ];
        for plan in &plans {
            prop_assert!(plan.jammed_arcs.len() <= budget);
            prop_assert!(plan.jammers.len() <= 2);
            for arc in &plan.jammed_arcs {
                prop_assert!(topo.has_link(arc.tx, arc.rx));
                prop_assert!(is_covered(&topo.position(arc.rx), &plan.jammers));
            }
            plan.validate(&topo, Some(2)).unwrap();
        }
    }
}
