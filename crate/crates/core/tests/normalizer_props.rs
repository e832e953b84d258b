use proptest::prelude::*;
use semgest_core::normalizer::{Mode, Normalizer, RawPhrase, RunKind};

const EMOJI: &[&str] = &[
    "😊", "🍀", "🙏", "😭", "👍", "✨", "💕", "❤️", "🎉", "😂", "🥺", "👨‍👩‍👧", "👍🏽", "🇯🇵", "1️⃣", "#️⃣", "🏳️‍🌈",
];

/// Characters that tend to interact: kaomoji parts, brackets, kana, emoji
/// components, punctuation and whitespace.
fn interesting_char() -> impl Strategy<Value = char> {
    prop_oneof![
        prop::sample::select(vec![
            '(', ')', '（', '）', '[', ']', '【', '】', '*', 'ω', '´', '`', '・', 'ー', '♡', '≧', '≦', '^', 'ﾟ', '▽', '∀',
            'o', 'O', 'x', '9', '\\', '/', 'ノ', 'ヽ', '٩', '۶', '┐', '└', '卍', 'っ', 'あ', 'ざ', 'い', '最', '!', '！',
            '?', '。', '、', '♪', '～', ' ', '\u{3000}', '\n', '\u{200D}', '\u{FE0F}', '\u{20E3}', '\u{1F3FD}', '🇯', '🇵',
            '😊', '🙏', '#', '1', '\u{E0067}',
        ]),
        any::<char>(),
    ]
}

fn phrase() -> impl Strategy<Value = String> {
    prop_oneof![
        any::<String>(),
        prop::collection::vec(interesting_char(), 0..40).prop_map(|v| v.into_iter().collect()),
    ]
}

fn no_emoji_text() -> impl Strategy<Value = String> {
    let n = Normalizer::default();
    prop::collection::vec(interesting_char(), 0..12).prop_map(move |v| {
        v.into_iter().filter(|c| !n.emoji().contains(*c)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn extract_is_lossless(s in phrase()) {
        let n = Normalizer::default();
        let out = n.normalize(&RawPhrase::new("p", s.clone()), Mode::Extract);
        prop_assert_eq!(out.reconstruct(), s.clone());
        prop_assert!(out.runs.iter().all(|r| !r.dropped));
        let mut at = 0;
        for r in &out.runs {
            prop_assert_eq!(r.position, at);
            prop_assert!(!r.content.is_empty());
            at += r.content.len();
        }
    }

    #[test]
    fn modes_agree_on_boundaries(s in phrase()) {
        let n = Normalizer::default();
        let p = RawPhrase::new("p", s);
        let strip = n.normalize(&p, Mode::Strip);
        let extract = n.normalize(&p, Mode::Extract);
        prop_assert_eq!(strip.runs.len(), extract.runs.len());
        for (a, b) in strip.runs.iter().zip(&extract.runs) {
            prop_assert_eq!((a.kind, &a.content, a.position), (b.kind, &b.content, b.position));
            prop_assert_eq!(a.dropped, a.kind != RunKind::Text);
        }
    }

    #[test]
    fn text_only_is_stable(s in phrase()) {
        let n = Normalizer::default();
        let first = n.normalize(&RawPhrase::new("p", s), Mode::Strip).text_only();
        let again = n.normalize(&RawPhrase::new("p", first.clone()), Mode::Strip);
        prop_assert!(
            again.runs.iter().all(|r| matches!(r.kind, RunKind::Text | RunKind::Emphasis)),
            "{:?}", again.runs
        );
        prop_assert_eq!(again.reconstruct(), first);
    }

    #[test]
    fn emoji_decided_by_code_point(x in no_emoji_text(), y in no_emoji_text(), i in 0..EMOJI.len()) {
        let e = EMOJI[i];
        let s = format!("{x}{e}{y}");
        let out = Normalizer::default().normalize(&RawPhrase::new("p", s), Mode::Extract);
        prop_assert!(
            out.runs.iter().any(|r| r.kind == RunKind::Emoji && r.content == e),
            "{:?}", out.runs
        );
    }
}
