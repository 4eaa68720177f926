use confab::transduction::{AnnotatedUtterance, PatternElement, Span};

/// Every assignment of widths to pattern elements that tiles the
/// utterance with each element accepting its tokens, sorted so the first
/// entry is the leftmost-shortest one.
pub fn all_assignments(elements: &[PatternElement], input: &AnnotatedUtterance) -> Vec<Vec<usize>> {
    fn accepts(e: &PatternElement, input: &AnnotatedUtterance, pos: usize, width: usize) -> bool {
        match e {
            PatternElement::Literal(w) => width == 1 && input.tokens[pos].word == *w,
            PatternElement::Class(t) => width == 1 && input.tokens[pos].features.contains(t),
            PatternElement::Gap { min, max } => width >= *min && width <= *max,
        }
    }
    let n = input.len();
    let mut out = Vec::new();
    let mut widths = vec![0usize; elements.len()];
    loop {
        if widths.iter().sum::<usize>() == n {
            let mut pos = 0;
            let ok = elements.iter().zip(&widths).all(|(e, &w)| {
                let good = pos + w <= n && accepts(e, input, pos, w);
                pos += w;
                good
            });
            if ok {
                out.push(widths.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == widths.len() {
                out.sort();
                return out;
            }
            widths[i] += 1;
            if widths[i] <= n {
                break;
            }
            widths[i] = 0;
            i += 1;
        }
    }
}

pub fn captures_for(elements: &[PatternElement], widths: &[usize]) -> Vec<Span> {
    let mut pos = 0;
    let mut caps = Vec::new();
    for (e, &w) in elements.iter().zip(widths) {
        if !matches!(e, PatternElement::Literal(_)) {
            caps.push(Span {
                start: pos,
                end: pos + w,
            });
        }
        pos += w;
    }
    caps
}
