use std::collections::BTreeSet;

use chrono::NaiveDate;
use proptest::prelude::*;

use corpusminer::cluster::split_chunks;
use corpusminer::entities::{filter_first_names, Candidate, NameLexicon};
use corpusminer::entities::{rank_entities, EntityCounts, EntityKind};
use corpusminer::evalmetrics::{
    adjusted_rand_score, cluster_accuracy, evaluate, max_weight_matching, mutual_info, normalized_mutual_info,
    purity_score, rand_score,
};
use corpusminer::harvest::{assign_reference_category, load_records, store_records, CategoryCode, DocumentRecord};
use corpusminer::harvest::QFIN_CATEGORIES;
use corpusminer::phrasemine::{token_mass, PhraseModel};
use corpusminer::textprep::{clean_corpus, flesch_score, lemmatize, tokenize, Stage, StopwordConfig, TokenDoc};

fn labelings(max_n: usize, max_k: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (2..=max_n).prop_flat_map(move |n| {
        (
            prop::collection::vec(0..max_k, n),
            prop::collection::vec(0..max_k, n),
        )
    })
}

fn relabel(labels: &[usize], perm: &[usize]) -> Vec<usize> {
    labels.iter().map(|&l| perm[l]).collect()
}

fn metrics(t: &[usize], p: &[usize]) -> [f64; 6] {
    [
        rand_score(t, p).unwrap(),
        adjusted_rand_score(t, p).unwrap(),
        mutual_info(t, p).unwrap(),
        normalized_mutual_info(t, p).unwrap(),
        cluster_accuracy(t, p).unwrap(),
        purity_score(t, p).unwrap(),
    ]
}

fn words(max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-e]{1,2}", 0..max_len)
}

fn record_strategy() -> impl Strategy<Value = DocumentRecord> {
    (
        "[0-9]{4}\\.[0-9]{5}",
        "[A-Za-z ]{0,40}",
        prop::collection::vec("[A-Z][a-z]{1,8} [A-Z][a-z]{1,10}", 0..4),
        prop::collection::vec(0..QFIN_CATEGORIES.len(), 1..4),
        1991..2030i32,
        "[ -~]{0,80}",
        prop::option::of("10\\.[0-9]{4}/[a-z0-9]{3,8}"),
        prop::option::of(0..3000i64),
    )
        .prop_map(|(id, title, authors, cats, year, abstract_text, doi, updated)| {
            let all_categories: Vec<CategoryCode> =
                cats.iter().map(|&c| CategoryCode::parse(QFIN_CATEGORIES[c]).unwrap()).collect();
            DocumentRecord {
                id,
                title,
                authors,
                reference_category: assign_reference_category(&all_categories),
                all_categories,
                year,
                abstract_text,
                doi,
                updated: updated.map(|d| NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Days::new(d as u64)),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metrics_invariant_under_relabelling(
        (t, p) in labelings(30, 5),
        perm_t in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
        perm_p in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let base = metrics(&t, &p);
        let moved = metrics(&relabel(&t, &perm_t), &relabel(&p, &perm_p));
        for (a, b) in base.iter().zip(moved) {
            prop_assert!((a - b).abs() < 1e-12, "{base:?} vs {moved:?}");
        }
    }

    #[test]
    fn purity_bounds_accuracy((t, p) in labelings(40, 6)) {
        prop_assert!(purity_score(&t, &p).unwrap() >= cluster_accuracy(&t, &p).unwrap());
    }

    #[test]
    fn identical_labelings_hit_the_maximum((t, _) in labelings(40, 6)) {
        let r = evaluate(&t, &t).unwrap();
        prop_assert_eq!(r.rs, 1.0);
        prop_assert!((r.ars - 1.0).abs() < 1e-12);
        prop_assert!((r.nmi - 1.0).abs() < 1e-12);
        prop_assert_eq!(r.ca, 1.0);
        prop_assert_eq!(r.ps, 1.0);
    }

    #[test]
    fn matching_never_below_diagonal(table in prop::collection::vec(prop::collection::vec(0u64..50, 4), 4)) {
        let diagonal: u64 = (0..4).map(|i| table[i][i]).sum();
        let best = max_weight_matching(&table);
        let row_max: u64 = table.iter().map(|r| *r.iter().max().unwrap()).sum();
        prop_assert!(best >= diagonal && best <= row_max);
    }

    #[test]
    fn prep_stages_shrink_and_clean_is_idempotent(texts in prop::collection::vec("[A-Za-z ,.]{0,200}", 1..6)) {
        let raw: Vec<TokenDoc> = texts.iter().enumerate().map(|(i, t)| tokenize(&format!("d{i}"), t)).collect();
        let lemmas: Vec<TokenDoc> = raw.iter().map(|d| lemmatize(d).unwrap()).collect();
        let cfg = StopwordConfig::default();
        let once = clean_corpus(&lemmas, &cfg, 2).unwrap();
        let twice = clean_corpus(&once, &cfg, 2).unwrap();
        prop_assert_eq!(&once, &twice);
        for ((r, l), c) in raw.iter().zip(&lemmas).zip(&once) {
            prop_assert!(c.len() <= l.len() && l.len() <= r.len());
        }
    }

    #[test]
    fn flesch_ignores_extra_whitespace(text in "[A-Za-z .!?]{0,120}", pad in "[ \t\n]{1,4}") {
        let spaced = text.replace(' ', &format!(" {pad}"));
        let a = flesch_score("a", &text);
        let b = flesch_score("b", &format!("{pad}{spaced}{pad}"));
        prop_assert_eq!(a.flesch, b.flesch);
    }

    #[test]
    fn phrase_merging_conserves_mass(docs in prop::collection::vec(words(40), 1..8)) {
        let corpus: Vec<TokenDoc> =
            docs.iter().enumerate().map(|(i, d)| TokenDoc::new(format!("d{i}"), Stage::Cleaned, d.clone())).collect();
        let model = PhraseModel::fit(&corpus, 1, 0.0).unwrap();
        for (before, after) in corpus.iter().zip(model.transform_corpus(&corpus)) {
            let mass: usize = after.tokens.iter().map(|t| token_mass(t)).sum();
            prop_assert_eq!(mass, before.len());
            prop_assert_eq!(after.tokens.join("_").replace('_', " "), before.tokens.join(" "));
        }
    }

    #[test]
    fn raising_threshold_never_adds_merges(docs in prop::collection::vec(words(40), 1..8), lo in 0.0f64..5.0, step in 0.0f64..5.0) {
        let corpus: Vec<TokenDoc> =
            docs.iter().enumerate().map(|(i, d)| TokenDoc::new(format!("d{i}"), Stage::Cleaned, d.clone())).collect();
        let merges = |threshold: f64| {
            let model = PhraseModel::fit(&corpus, 1, threshold).unwrap();
            model.transform_corpus(&corpus).iter().flat_map(|d| d.tokens.clone()).filter(|t| t.contains('_')).count()
        };
        prop_assert!(merges(lo + step) <= merges(lo));
    }

    #[test]
    fn chunks_conserve_tokens(len in 0usize..1500, size in 1usize..400) {
        let tokens: Vec<String> = (0..len).map(|i| i.to_string()).collect();
        let chunks = split_chunks(&tokens, size);
        prop_assert_eq!(chunks.iter().map(|c| c.len()).sum::<usize>(), len);
        prop_assert_eq!(chunks.concat(), tokens.clone());
        if len <= size {
            prop_assert_eq!(chunks.len(), 1);
        }
    }

    #[test]
    fn store_round_trip(records in prop::collection::btree_map("[0-9]{4}\\.[0-9]{5}", record_strategy(), 1..8)) {
        let records: Vec<DocumentRecord> =
            records.into_iter().map(|(id, r)| DocumentRecord { id, ..r }).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.ndjson");
        store_records(&records, &path).unwrap();
        prop_assert_eq!(load_records(&path).unwrap(), records);
    }

    #[test]
    fn reference_category_ignores_appended_foreign_codes(
        cats in prop::collection::vec(0..QFIN_CATEGORIES.len(), 1..4),
        extra in prop::collection::vec(prop::sample::select(vec!["stat.ML", "math.PR", "cs.LG", "econ.EM"]), 0..4),
    ) {
        let base: Vec<CategoryCode> = cats.iter().map(|&c| CategoryCode::parse(QFIN_CATEGORIES[c]).unwrap()).collect();
        let mut longer = base.clone();
        longer.extend(extra.iter().map(|c| CategoryCode::parse(c).unwrap()));
        prop_assert_eq!(assign_reference_category(&base), assign_reference_category(&longer));
    }

    #[test]
    fn first_name_filter_shrinks_and_is_idempotent(names in prop::collection::vec("[A-Z][a-z]{2,7}", 0..20)) {
        let lexicon = NameLexicon::bundled();
        let candidates: Vec<Candidate> =
            names.iter().enumerate().map(|(i, n)| Candidate { name: n.clone(), position: i }).collect();
        let once = filter_first_names(&candidates, &lexicon);
        prop_assert!(once.len() <= candidates.len());
        prop_assert_eq!(filter_first_names(&once, &lexicon), once);
    }

    #[test]
    fn ranking_sorted_and_bounded(
        counts in prop::collection::btree_map("[A-Z][a-z]{1,6}", 1u64..100, 0..30),
        min in 0u64..50,
        top in 0usize..15,
    ) {
        let mut c = EntityCounts::new(EntityKind::Person);
        for (k, v) in &counts {
            c.add(k, *v);
        }
        let ranked = rank_entities(&c, min, top);
        prop_assert!(ranked.len() <= top);
        prop_assert!(ranked.iter().all(|(_, n)| *n > min));
        prop_assert!(ranked.windows(2).all(|w| w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0)));
        let distinct: BTreeSet<&String> = ranked.iter().map(|(k, _)| k).collect();
        prop_assert_eq!(distinct.len(), ranked.len());
    }
}
