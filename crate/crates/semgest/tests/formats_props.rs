use std::path::Path;

use proptest::prelude::*;
use semgest::formats;
use semgest_core::evalstats::{Condition, Question, SurveyRecord};

fn p() -> &'static Path {
    Path::new("mem")
}

fn record() -> impl Strategy<Value = SurveyRecord> {
    (
        "[a-z][a-z0-9]{0,6}",
        prop::sample::select(Question::ALL.to_vec()),
        prop::bool::ANY,
        1u32..4,
        1u8..=5,
    )
        .prop_map(|(participant, question, m, clip, score)| SurveyRecord {
            participant,
            question,
            condition: if m { Condition::Matched } else { Condition::Shuffled },
            clip,
            score,
        })
}

proptest! {
    #[test]
    fn survey_round_trips(records in prop::collection::vec(record(), 0..30)) {
        let mut buf = Vec::new();
        formats::write_survey(&mut buf, &records).unwrap();
        let back = formats::parse_survey(std::str::from_utf8(&buf).unwrap(), p()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn corpus_keeps_text_verbatim(texts in prop::collection::vec("[^\t\n\r]{1,20}", 1..20)) {
        let texts: Vec<String> = texts.into_iter().filter(|t| !t.trim().is_empty()).collect();
        let body: String = texts.iter().enumerate().map(|(i, t)| format!("id{i}\t{t}\n")).collect();
        let corpus = formats::parse_corpus(&body, p()).unwrap();
        prop_assert_eq!(corpus.len(), texts.len());
        for (ph, t) in corpus.iter().zip(&texts) {
            prop_assert_eq!(&ph.text, t);
        }
    }

    #[test]
    fn vector_rows_parse_back(rows in prop::collection::btree_map("[a-zあ-ん]{1,5}", prop::collection::vec(-10.0f64..10.0, 3), 1..10)) {
        let body: String = rows
            .iter()
            .map(|(w, v)| format!("{w} {}\n", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")))
            .collect();
        let parsed = formats::parse_vectors(&body, Some(3), p()).unwrap();
        prop_assert_eq!(parsed.dim, 3);
        prop_assert_eq!(parsed.rows.len(), rows.len());
        for (w, v) in &parsed.rows {
            prop_assert_eq!(&rows[w], v);
        }
    }
}
