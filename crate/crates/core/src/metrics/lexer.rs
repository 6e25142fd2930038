//! A tokenizer for Java sources that is good enough for metric extraction.
//!
//! Comments are dropped. String, char and text-block literals become single
//! opaque tokens. `>>` and `>>>` are lexed as single operators; the parser
//! splits them back apart when they close type-argument lists.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    StringLiteral,
    CharLiteral,
    NumberLiteral,
    Operator,
    Punctuation,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// 1-based line of the last character; differs from `line` only for
    /// text blocks.
    pub end_line: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.is(TokenKind::Operator, text)
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punctuation, text)
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Identifier
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated literal or comment starting at line {0}")]
    UnterminatedLiteral(usize),
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "null", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "true", "try", "void", "volatile", "while",
];

pub const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
];

// Longest first within each leading character.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "=", "<", ">", "!", "~",
    "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', '.'];

/// Tokenizes `source`, failing on an unclosed literal or block comment.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    match lex_lossy(source) {
        (tokens, None) => Ok(tokens),
        (_, Some(err)) => Err(err),
    }
}

/// Tokenizes as much as possible; on error returns the tokens read before the
/// offending literal together with the error.
pub fn lex_lossy(source: &str) -> (Vec<Token>, Option<LexError>) {
    let mut lexer = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        tokens: Vec::new(),
    };
    let err = lexer.run().err();
    (lexer.tokens, err)
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    tokens: Vec<Token>,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

impl Lexer {
    fn peek(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek(i) == Some(c))
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: usize) {
        let text: String = self.chars[start..self.pos].iter().collect();
        self.tokens.push(Token {
            kind,
            text,
            line,
            end_line: self.line,
        });
    }

    fn run(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek(0) {
            let start = self.pos;
            let line = self.line;
            match c {
                '\n' => {
                    self.line += 1;
                    self.pos += 1;
                }
                c if c.is_whitespace() => self.pos += 1,
                '/' if self.peek(1) == Some('/') => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.pos += 1;
                    }
                }
                '/' if self.peek(1) == Some('*') => {
                    self.pos += 2;
                    loop {
                        match self.peek(0) {
                            None => return Err(LexError::UnterminatedLiteral(line)),
                            Some('*') if self.peek(1) == Some('/') => {
                                self.pos += 2;
                                break;
                            }
                            Some('\n') => {
                                self.line += 1;
                                self.pos += 1;
                            }
                            Some(_) => self.pos += 1,
                        }
                    }
                }
                '"' if self.starts_with("\"\"\"") => {
                    self.pos += 3;
                    loop {
                        match self.peek(0) {
                            None => return Err(LexError::UnterminatedLiteral(line)),
                            Some('\\') => self.pos += 2,
                            Some('"') if self.starts_with("\"\"\"") => {
                                self.pos += 3;
                                break;
                            }
                            Some('\n') => {
                                self.line += 1;
                                self.pos += 1;
                            }
                            Some(_) => self.pos += 1,
                        }
                    }
                    self.push(TokenKind::StringLiteral, start, line);
                }
                '"' | '\'' => {
                    self.pos += 1;
                    loop {
                        match self.peek(0) {
                            None | Some('\n') => return Err(LexError::UnterminatedLiteral(line)),
                            Some('\\') => self.pos += 2,
                            Some(q) if q == c => {
                                self.pos += 1;
                                break;
                            }
                            Some(_) => self.pos += 1,
                        }
                    }
                    let kind = if c == '"' {
                        TokenKind::StringLiteral
                    } else {
                        TokenKind::CharLiteral
                    };
                    self.push(kind, start, line);
                }
                '@' => {
                    self.pos += 1;
                    while self.peek(0).is_some_and(|c| c == ' ' || c == '\t') {
                        self.pos += 1;
                    }
                    if !self.peek(0).is_some_and(is_ident_start) {
                        // Stray '@' carries no information.
                        continue;
                    }
                    self.eat_qualified_name();
                    let text: String = self.chars[start..self.pos]
                        .iter()
                        .filter(|c| !c.is_whitespace())
                        .collect();
                    self.tokens.push(Token {
                        kind: TokenKind::Annotation,
                        text,
                        line,
                        end_line: line,
                    });
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) => {
                    self.eat_number();
                    self.push(TokenKind::NumberLiteral, start, line);
                }
                c if is_ident_start(c) => {
                    while self.peek(0).is_some_and(is_ident_part) {
                        self.pos += 1;
                    }
                    let text: String = self.chars[start..self.pos].iter().collect();
                    let kind = if KEYWORDS.contains(&text.as_str()) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Identifier
                    };
                    self.tokens.push(Token {
                        kind,
                        text,
                        line,
                        end_line: line,
                    });
                }
                c if PUNCTUATION.contains(&c) && !self.starts_with("...") => {
                    self.pos += 1;
                    self.push(TokenKind::Punctuation, start, line);
                }
                _ => match OPERATORS.iter().find(|op| self.starts_with(op)) {
                    Some(op) => {
                        self.pos += op.chars().count();
                        self.push(TokenKind::Operator, start, line);
                    }
                    // Unknown characters are skipped.
                    None => self.pos += 1,
                },
            }
        }
        Ok(())
    }

    fn eat_qualified_name(&mut self) {
        loop {
            while self.peek(0).is_some_and(is_ident_part) {
                self.pos += 1;
            }
            if self.peek(0) == Some('.') && self.peek(1).is_some_and(is_ident_start) {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn eat_number(&mut self) {
        let hex = self.peek(0) == Some('0') && matches!(self.peek(1), Some('x' | 'X'));
        let mut seen_dot = false;
        while let Some(c) = self.peek(0) {
            let exponent = if hex { matches!(c, 'p' | 'P') } else { matches!(c, 'e' | 'E') };
            if exponent && matches!(self.peek(1), Some('+' | '-')) {
                self.pos += 2;
            } else if c == '.' {
                let next = self.peek(1);
                let continues = next.is_none_or(|n| {
                    n.is_ascii_digit() || !is_ident_start(n) || matches!(n, 'e' | 'E' | 'f' | 'F' | 'd' | 'D')
                });
                if seen_dot || hex || !continues {
                    break;
                }
                seen_dot = true;
                self.pos += 1;
            } else if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }
}
