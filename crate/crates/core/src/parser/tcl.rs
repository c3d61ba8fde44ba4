//! Splits Tcl-style scripts into commands and words.
//!
//! Only grouping is supported: braces keep their contents verbatim, double
//! quotes group words and process a small set of backslash escapes.
//! Variable and command substitution are rejected.

use super::diag::Severity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WordKind {
    Bare,
    Braced,
    Quoted,
}

#[derive(Debug, Clone)]
pub(crate) struct Word {
    pub text: String,
    pub kind: WordKind,
    pub start: usize,
    pub end: usize,
    /// Offset of the first content byte (after an opening brace or quote).
    pub content_start: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Command {
    pub words: Vec<Word>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawDiag {
    pub severity: Severity,
    pub message: String,
    pub start: usize,
    pub end: usize,
}

impl RawDiag {
    pub fn error(message: impl Into<String>, start: usize, end: usize) -> Self {
        RawDiag {
            severity: Severity::Error,
            message: message.into(),
            start,
            end,
        }
    }

    pub fn warning(message: impl Into<String>, start: usize, end: usize) -> Self {
        RawDiag {
            severity: Severity::Warning,
            message: message.into(),
            start,
            end,
        }
    }
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    end: usize,
}

impl<'a> Scanner<'a> {
    fn peek(&self) -> Option<char> {
        if self.pos >= self.end {
            None
        } else {
            self.src[self.pos..self.end].chars().next()
        }
    }

    fn peek_at(&self, ahead: usize) -> Option<u8> {
        let i = self.pos + ahead;
        if i < self.end {
            Some(self.src.as_bytes()[i])
        } else {
            None
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_line_continuation(&self) -> bool {
        self.peek_at(0) == Some(b'\\') && self.peek_at(1) == Some(b'\n')
    }

    /// Skips blanks within a command: spaces, tabs, carriage returns and
    /// backslash-newline sequences.
    fn skip_blanks(&mut self) {
        loop {
            match self.peek_at(0) {
                Some(b' ' | b'\t' | b'\r') => self.pos += 1,
                _ if self.at_line_continuation() => self.pos += 2,
                _ => break,
            }
        }
    }

    fn at_word_end(&self) -> bool {
        matches!(self.peek_at(0), None | Some(b' ' | b'\t' | b'\r' | b'\n' | b';')) || self.at_line_continuation()
    }
}

/// Splits `src[start..end]` into commands. On a fatal error the diagnostic
/// is recorded and the commands read so far are returned.
pub(crate) fn split_script(src: &str, start: usize, end: usize, diags: &mut Vec<RawDiag>) -> Vec<Command> {
    let mut s = Scanner { src, pos: start, end };
    let mut commands = Vec::new();
    loop {
        // Separators between commands.
        loop {
            match s.peek_at(0) {
                Some(b' ' | b'\t' | b'\r' | b'\n' | b';') => s.pos += 1,
                _ if s.at_line_continuation() => s.pos += 2,
                _ => break,
            }
        }
        match s.peek_at(0) {
            None => break,
            Some(b'#') => {
                skip_comment(&mut s);
                continue;
            }
            _ => {}
        }
        let mut words = Vec::new();
        loop {
            s.skip_blanks();
            match s.peek_at(0) {
                None => break,
                Some(b'\n' | b';') => {
                    s.pos += 1;
                    break;
                }
                _ => {}
            }
            match read_word(&mut s, diags) {
                Some(w) => words.push(w),
                None => return commands,
            }
        }
        if !words.is_empty() {
            commands.push(Command { words });
        }
    }
    commands
}

fn skip_comment(s: &mut Scanner<'_>) {
    while let Some(c) = s.peek_at(0) {
        if c == b'\\' && s.peek_at(1).is_some() {
            s.pos += 1;
            s.bump();
            continue;
        }
        if c == b'\n' {
            break;
        }
        s.bump();
    }
}

fn read_word(s: &mut Scanner<'_>, diags: &mut Vec<RawDiag>) -> Option<Word> {
    let start = s.pos;
    match s.peek_at(0) {
        Some(b'{') => read_braced(s, diags, start),
        Some(b'"') => read_quoted(s, diags, start),
        _ => read_bare(s, diags, start),
    }
}

fn read_braced(s: &mut Scanner<'_>, diags: &mut Vec<RawDiag>, start: usize) -> Option<Word> {
    s.pos += 1;
    let content_start = s.pos;
    let mut depth = 1usize;
    loop {
        match s.peek_at(0) {
            None => {
                diags.push(RawDiag::error("missing close-brace", start, start + 1));
                return None;
            }
            Some(b'\\') => {
                s.pos += 1;
                s.bump();
            }
            Some(b'{') => {
                depth += 1;
                s.pos += 1;
            }
            Some(b'}') => {
                depth -= 1;
                s.pos += 1;
                if depth == 0 {
                    break;
                }
            }
            Some(_) => {
                s.bump();
            }
        }
    }
    let content_end = s.pos - 1;
    if !s.at_word_end() {
        diags.push(RawDiag::error("extra characters after close-brace", s.pos, s.pos + 1));
        return None;
    }
    Some(Word {
        text: s.src[content_start..content_end].to_string(),
        kind: WordKind::Braced,
        start,
        end: s.pos,
        content_start,
    })
}

fn read_escape(s: &mut Scanner<'_>, diags: &mut Vec<RawDiag>, out: &mut String) {
    let at = s.pos;
    s.pos += 1; // backslash
    match s.bump() {
        Some('"') => out.push('"'),
        Some('\\') => out.push('\\'),
        Some('n') => out.push('\n'),
        Some('t') => out.push('\t'),
        Some('\n') => out.push(' '),
        Some(c) => {
            diags.push(RawDiag::warning(
                format!("unsupported escape sequence \\{c}; kept as {c:?}"),
                at,
                s.pos,
            ));
            out.push(c);
        }
        None => out.push('\\'),
    }
}

fn substitution_error(c: char, at: usize) -> RawDiag {
    let what = if c == '$' { "variable" } else { "command" };
    RawDiag::error(format!("{what} substitution is not supported"), at, at + 1)
}

fn read_quoted(s: &mut Scanner<'_>, diags: &mut Vec<RawDiag>, start: usize) -> Option<Word> {
    s.pos += 1;
    let content_start = s.pos;
    let mut text = String::new();
    loop {
        match s.peek() {
            None => {
                diags.push(RawDiag::error("missing close-quote", start, start + 1));
                return None;
            }
            Some('"') => {
                s.pos += 1;
                break;
            }
            Some('\\') => read_escape(s, diags, &mut text),
            Some(c @ ('$' | '[')) => {
                diags.push(substitution_error(c, s.pos));
                return None;
            }
            Some(c) => {
                text.push(c);
                s.pos += c.len_utf8();
            }
        }
    }
    if !s.at_word_end() {
        diags.push(RawDiag::error("extra characters after close-quote", s.pos, s.pos + 1));
        return None;
    }
    Some(Word {
        text,
        kind: WordKind::Quoted,
        start,
        end: s.pos,
        content_start,
    })
}

fn read_bare(s: &mut Scanner<'_>, diags: &mut Vec<RawDiag>, start: usize) -> Option<Word> {
    let mut text = String::new();
    while !s.at_word_end() {
        match s.peek() {
            Some('\\') => read_escape(s, diags, &mut text),
            Some(c @ ('$' | '[')) => {
                diags.push(substitution_error(c, s.pos));
                return None;
            }
            Some(c) => {
                text.push(c);
                s.pos += c.len_utf8();
            }
            None => break,
        }
    }
    Some(Word {
        text,
        kind: WordKind::Bare,
        start,
        end: s.pos,
        content_start: start,
    })
}
