use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
}

impl ParseDiagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}:{}: {}: {}",
            self.span.file, self.span.start_line, self.span.start_col, sev, self.message
        )
    }
}

impl std::error::Error for ParseDiagnostic {}

/// Maps byte offsets of one source text to 1-based line and column.
pub(crate) struct SourceMap<'a> {
    file: String,
    text: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> SourceMap<'a> {
    pub fn new(file: &str, text: &'a str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        SourceMap {
            file: file.to_string(),
            text,
            line_starts,
        }
    }

    fn position(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.text.len());
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.line_starts[line];
        let col = self
            .text
            .get(start..offset)
            .map_or(offset - start, |s| s.chars().count());
        (line + 1, col + 1)
    }

    pub fn span(&self, start: usize, end: usize) -> SourceSpan {
        let (start_line, start_col) = self.position(start);
        let (end_line, end_col) = self.position(end.max(start));
        SourceSpan {
            file: self.file.clone(),
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn diagnostic(
        &self,
        severity: Severity,
        message: impl Into<String>,
        start: usize,
        end: usize,
    ) -> ParseDiagnostic {
        ParseDiagnostic {
            severity,
            message: message.into(),
            span: self.span(start, end),
        }
    }
}
