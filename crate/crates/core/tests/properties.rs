use proptest::prelude::*;

use fairlab::ccs_lang::{canonical, parse_ccs, parse_state, well_named};
use fairlab::lts_model::{isomorphic, load_lts, save_lts, AugmentedLts, Notion};
use fairlab::paths::{Assumption, AssumptionKind, Checker};
use fairlab::semantics::{explore, DEFAULT_DEPTH_CAP, DEFAULT_STATE_CAP};
use fairlab::verify::{enumerate_lassos, HierarchyBounds};

const ACTIONS: [&str; 6] = ["a", "'a", "b", "'b", "c", "tau"];

/// One summand `act.K` or `act.0`, where K is the component's own variable.
fn summand() -> impl Strategy<Value = (usize, bool)> {
    (0..ACTIONS.len(), any::<bool>())
}

/// A parallel composition of 1 to 3 recursive components, optionally restricted on `a`.
fn system() -> impl Strategy<Value = String> {
    (prop::collection::vec(prop::collection::vec(summand(), 1..4), 1..4), any::<bool>()).prop_map(|(comps, restrict)| {
        let names: Vec<String> = (0..comps.len()).map(|i| format!("K{i}")).collect();
        let par = names.join(" | ");
        let top = if restrict { format!("({par})\\a") } else { par };
        let defs: Vec<String> = comps
            .iter()
            .zip(&names)
            .map(|(ss, k)| {
                let body: Vec<String> =
                    ss.iter().map(|&(a, back)| format!("{}.{}", ACTIONS[a], if back { k.as_str() } else { "0" })).collect();
                format!("{k} = {}", body.join(" + "))
            })
            .collect();
        format!("{top} where {}", defs.join(", "))
    })
}

fn lts_of(src: &str) -> AugmentedLts {
    explore(&parse_ccs(src).expect("generated systems parse"), DEFAULT_STATE_CAP, DEFAULT_DEPTH_CAP).lts
}

fn kinds() -> Vec<AssumptionKind> {
    let mut v = vec![AssumptionKind::P, AssumptionKind::Just, AssumptionKind::Swi];
    for n in Notion::GLOBAL {
        v.extend([AssumptionKind::J(n), AssumptionKind::W(n), AssumptionKind::S(n)]);
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exploration_is_deterministic_and_round_trips(src in system()) {
        let a = lts_of(&src);
        let b = lts_of(&src);
        let doc = save_lts(&a);
        prop_assert_eq!(&doc, &save_lts(&b));
        let back = load_lts(&doc).unwrap();
        prop_assert!(isomorphic(&a, &back));
        prop_assert_eq!(doc, save_lts(&back));
    }

    #[test]
    fn states_print_canonically_and_stay_well_named(src in system()) {
        let lts = lts_of(&src);
        for s in 0..lts.num_states() {
            let e = lts.expr(s).unwrap();
            prop_assert!(well_named(e), "{}", canonical(e));
            let text = lts.states[s].expr.clone().unwrap();
            prop_assert_eq!(canonical(&parse_state(&text).unwrap()), text);
        }
    }

    #[test]
    fn fairness_ignores_where_a_lasso_is_anchored(src in system(), pick in any::<prop::sample::Index>(), k in 0..kinds().len()) {
        let lts = lts_of(&src);
        let lassos = enumerate_lassos(&lts, HierarchyBounds { stem: 2, cycle: 4 });
        prop_assume!(!lassos.is_empty());
        let l = pick.get(&lassos);
        let c = Checker::new(&lts, &Assumption::new(kinds()[k])).unwrap();
        let fair = c.classify_lasso(l).unwrap();
        prop_assert_eq!(c.classify_lasso(&l.rotated()).unwrap(), fair);
        prop_assert_eq!(c.classify_lasso(&l.pumped()).unwrap(), fair);
    }
}
