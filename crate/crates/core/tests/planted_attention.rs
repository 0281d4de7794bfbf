use habcnn::corpus::synthesize_corpus;
use habcnn::eval::{export_attention, TraceLevel};
use habcnn::{train, Arch, EmbeddingTable, Habcnn, HyperParams};

#[test]
fn trained_te_attends_to_planted_sentence() {
    let synth = synthesize_corpus(31, 8, 45);
    let table = EmbeddingTable::parse(&synth.embedding_file(20, 31)).unwrap();
    let hp = HyperParams {
        hidden: 24,
        epochs: 15,
        ..HyperParams::default()
    };
    let out = train(&synth.corpus, &synth.corpus, &table, Arch::Te, &hp).unwrap();
    let model = Habcnn::new(&out.params, &table);

    for (item, info) in synth.corpus.items.iter().zip(&synth.info) {
        for (q, qa) in item.questions.iter().enumerate() {
            let scores = model.score_candidates(&item.story, qa).unwrap();
            let c = qa.correct_index;
            for (d, s) in scores.iter().enumerate() {
                if d != c {
                    assert!(scores[c] > *s, "{} q{q}: {scores:?}", item.story.id);
                }
            }
            let trace = export_attention(&model, item, q, c).unwrap();
            let best = trace
                .iter()
                .filter(|r| r.level == TraceLevel::Sentence)
                .fold(None::<(usize, f64)>, |acc, r| match acc {
                    Some((_, w)) if w >= r.weight => acc,
                    _ => Some((r.index, r.weight)),
                })
                .unwrap();
            assert_eq!(best.0, info.planted_sentence[q], "{} q{q}", item.story.id);
            assert!(trace.iter().any(|r| r.level == TraceLevel::Sentence
                && r.selected
                && r.text.contains(&info.keyword[q])));
        }
    }
}
