//! `LIKE` pattern matching: `*` matches zero or more characters, `?` exactly
//! one, everything else literally.

/// Returns true if `text` matches the wildcard `pattern`.
pub fn like_matches(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    // Position of the last `*` seen and the text index it was tried at.
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || (p[pi] != '*' && p[pi] == t[ti])) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// The canonical witness for a pattern: every `*` dropped and every `?`
/// replaced by `a`.
pub fn like_witness(pattern: &str) -> String {
    pattern
        .chars()
        .filter_map(|c| match c {
            '*' => None,
            '?' => Some('a'),
            c => Some(c),
        })
        .collect()
}
