use proptest::prelude::*;
use semgest_core::conceptspace::{
    apply_curation, ConceptId, CurationAction, Origin, OriginCluster, Seed,
};
use semgest_core::embeddings::{cosine, VectorStore};
use semgest_core::gestures::{shuffle_pairs, Catalog, Gesture};
use semgest_core::normalizer::{Normalizer, RawPhrase};
use semgest_core::pipeline::{Pipeline, PipelineParams};
use semgest_core::tokenizer::Lexicon;

fn gestures() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..6, 2..16)
}

fn max_multiplicity(g: &[u8]) -> usize {
    (0..6).map(|v| g.iter().filter(|&&x| x == v).count()).max().unwrap_or(0)
}

fn pipeline(store_scale: f64) -> Pipeline {
    let mut lex = Lexicon::new();
    let mut store = VectorStore::new(3).unwrap();
    for (w, v) in [("あり", [1.0, 0.1, 0.0]), ("いい", [0.0, 1.0, 0.2]), ("だめ", [-0.5, 0.0, 1.0]), ("まじ", [0.3, 0.3, 0.3])] {
        lex.insert_word(w).unwrap();
        store.insert(w, v.iter().map(|x| x * store_scale).collect()).unwrap();
    }
    store.insert_symbol("🙏", vec![store_scale, 0.0, 0.0]).unwrap();
    let catalog = Catalog::new(
        ["idle", "a", "b", "c"]
            .iter()
            .map(|id| Gesture { id: id.to_string(), name: id.to_string(), duration_ms: 700, tags: vec![] })
            .collect(),
    )
    .unwrap();
    let p = Pipeline::new(
        Normalizer::default(),
        lex,
        store,
        Default::default(),
        catalog,
        PipelineParams { tau: 0.3, ..PipelineParams::default() },
    )
    .unwrap();
    let origin = Origin {
        clusters: ["あり", "いい", "だめ"]
            .iter()
            .enumerate()
            .map(|(i, t)| OriginCluster { seeds: vec![Seed::new(format!("s{i}"), *t)], nameplate: Some(format!("C{i}")), gesture_ids: vec![] })
            .collect(),
        default_labels: false,
        rules: vec![],
    };
    let mut set = origin.build(&p).unwrap();
    for (id, g) in [(0, "a"), (0, "b"), (1, "c")] {
        set = apply_curation(&set, &CurationAction::AttachGesture { id: ConceptId(id), gesture: g.into() }, &p).unwrap();
    }
    let mut p = p;
    p.set_concepts(set);
    p
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        any::<String>(),
        prop::collection::vec(prop::sample::select(vec!["あり", "いい", "だめ", "まじ", "🙏", "!!", "(´ω`)", " ", "x"]), 0..6)
            .prop_map(|v| v.concat()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn shuffle_preserves_and_deranges(g in gestures(), seed in any::<u64>()) {
        let pairs: Vec<(usize, u8)> = g.iter().copied().enumerate().collect();
        let out = shuffle_pairs(&pairs, seed).unwrap();
        prop_assert_eq!(out.iter().map(|p| p.0).collect::<Vec<_>>(), (0..g.len()).collect::<Vec<_>>());
        let mut a: Vec<u8> = out.iter().map(|p| p.1).collect();
        let mut b = g.clone();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
        if 2 * max_multiplicity(&g) <= g.len() {
            prop_assert!(out.iter().zip(&pairs).all(|(o, p)| o.1 != p.1));
        }
        prop_assert_eq!(shuffle_pairs(&pairs, seed).unwrap(), out);
    }

    #[test]
    fn every_phrase_gets_a_cue(s in text()) {
        let p = pipeline(1.0);
        let phrase = RawPhrase::new("q", s);
        let cue = p.map_phrase_to_gesture(&phrase).unwrap();
        prop_assert!(p.catalog().contains(&cue.gesture_id));
        prop_assert_eq!(p.map_phrase_to_gesture(&phrase).unwrap(), cue.clone());
        let t = p.trace(&phrase).unwrap();
        prop_assert_eq!(t.cue, cue.clone());
        prop_assert_eq!(cue.concept_id, t.assignment.concept);
    }

    #[test]
    fn scaling_vectors_keeps_nearest_choice(s in text(), c in 0.05f64..20.0) {
        let phrase = RawPhrase::new("q", s);
        let base = pipeline(1.0);
        let v = base.embed(&phrase).unwrap();
        let mut sims: Vec<f64> = base.concepts().concepts.iter().map(|c| cosine(&v.v, &c.centroid).unwrap()).collect();
        sims.sort_by(|a, b| b.total_cmp(a));
        if sims[0] - sims[1] <= 1e-9 {
            return Ok(());
        }
        let a = base.assign(&phrase).unwrap();
        let b = pipeline(c).assign(&phrase).unwrap();
        prop_assert_eq!(a.concept, b.concept);
    }
}
