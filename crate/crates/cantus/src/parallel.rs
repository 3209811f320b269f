//! Piece-parallel rule extraction.
//!
//! Pieces are split into contiguous chunks, each counted on its own thread,
//! and the partial accumulators are merged in chunk order. Merging is
//! value-wise count addition, so the result is identical to single-threaded
//! extraction regardless of scheduling.

use cantus_core::rules::RuleAccumulator;
use cantus_core::{Corpus, Rule, RuleError, RuleSpec};

/// Extract `spec` over `corpus` using up to `threads` worker threads.
/// Equivalent to [`Rule::extract`], bit for bit.
pub fn extract_parallel(
    corpus: &Corpus,
    spec: &RuleSpec,
    threads: usize,
) -> Result<Rule, RuleError> {
    let threads = threads.max(1).min(corpus.pieces().len().max(1));
    if threads == 1 {
        return Rule::extract(corpus, spec);
    }
    // validate the spec against the corpus before spawning anything
    let mut combined = RuleAccumulator::new(spec.clone(), corpus.arity())?;

    let pieces = corpus.pieces();
    let chunk_size = pieces.len().div_ceil(threads);
    let partials: Vec<RuleAccumulator> = std::thread::scope(|scope| {
        let handles: Vec<_> = pieces
            .chunks(chunk_size)
            .map(|chunk| {
                let spec = spec.clone();
                let arity = corpus.arity();
                scope.spawn(move || {
                    let mut acc = RuleAccumulator::new(spec, arity)
                        .expect("spec validated before spawning");
                    for piece in chunk {
                        acc.add_piece(piece);
                    }
                    acc
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("extraction worker panicked"))
            .collect()
    });

    for partial in partials {
        combined.merge(partial);
    }
    combined.finish()
}
