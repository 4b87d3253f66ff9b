use std::fmt;

use super::{Expr, InstructionAst, Item, JoinOp, Qualifier, Segment};
use crate::stimulus::AttributeSpace;
use crate::value::{Attribute, IdentityValue, Location, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Parses an instruction over the default attribute vocabulary.
pub fn parse_instruction(text: &str) -> Result<InstructionAst, ParseError> {
    parse_instruction_in(text, &AttributeSpace::default())
}

/// Parses an instruction whose category words come from `space`.
pub fn parse_instruction_in(text: &str, space: &AttributeSpace) -> Result<InstructionAst, ParseError> {
    let mut categories = space.categories.clone();
    categories.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let mut p = Parser {
        text,
        pos: 0,
        categories,
    };
    let ast = p.instruction()?;
    check_ordinals(&ast).map_err(|message| ParseError {
        position: text.len(),
        message,
    })?;
    Ok(ast)
}

fn check_ordinals(ast: &InstructionAst) -> Result<(), String> {
    let mut declared = 0u32;
    for segment in &ast.segments {
        for item in &segment.items {
            if let Item::Observe { ordinal, .. } = item {
                if *ordinal != declared + 1 {
                    return Err(format!(
                        "object {ordinal} observed where object {} was expected",
                        declared + 1
                    ));
                }
                declared = *ordinal;
            }
        }
        if declared == 0 {
            continue;
        }
        if let Some(q) = &segment.question {
            if let Some(k) = max_ordinal(q).filter(|k| *k > declared) {
                return Err(format!("question refers to object {k}, which is not observed yet"));
            }
        }
    }
    Ok(())
}

fn max_ordinal(e: &Expr) -> Option<u32> {
    match e {
        Expr::Get { ordinal, .. } | Expr::Exists { ordinal, .. } => Some(*ordinal),
        Expr::Literal(_) => None,
        Expr::Compare { lhs, rhs, .. } | Expr::Join { lhs, rhs, .. } => max_ordinal(lhs).max(max_ordinal(rhs)),
        Expr::Group(inner) => max_ordinal(inner),
        Expr::If { cond, then, otherwise } => max_ordinal(cond).max(max_ordinal(then)).max(max_ordinal(otherwise)),
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    categories: Vec<String>,
}

fn is_boundary(c: Option<char>) -> bool {
    matches!(c, None | Some(' ' | ',' | '?' | ')'))
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    /// Eats `lit` only when a word boundary follows it.
    fn eat_word(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) && is_boundary(self.rest()[lit.len()..].chars().next()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), ParseError> {
        if self.eat(lit) {
            Ok(())
        } else {
            self.error(format!("expected {lit:?}"))
        }
    }

    fn instruction(&mut self) -> Result<InstructionAst, ParseError> {
        let mut segments = Vec::new();
        loop {
            segments.push(self.segment()?);
            if self.rest().is_empty() {
                break;
            }
            self.expect(" ")?;
            if self.rest().is_empty() {
                break;
            }
        }
        Ok(InstructionAst { segments })
    }

    fn starts_item(&self) -> bool {
        let r = self.rest();
        r.starts_with("observe ") || (r.starts_with("delay") && is_boundary(r[5..].chars().next()))
    }

    fn segment(&mut self) -> Result<Segment, ParseError> {
        let mut items = Vec::new();
        loop {
            if !self.starts_item() {
                let question = self.question()?;
                self.eat(" ");
                self.expect("?")?;
                return Ok(Segment {
                    items,
                    question: Some(question),
                });
            }
            items.push(self.item()?);
            if self.eat(",") {
                self.eat(" ");
            } else {
                return Ok(Segment { items, question: None });
            }
        }
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        if self.eat_word("delay") {
            return Ok(Item::Delay);
        }
        self.expect("observe ")?;
        self.eat("object ");
        let ordinal = self.ordinal()?;
        let qualifier = if self.eat(" with ") {
            Some(self.qualifier()?)
        } else {
            None
        };
        Ok(Item::Observe { ordinal, qualifier })
    }

    fn ordinal(&mut self) -> Result<u32, ParseError> {
        let n = self.number()?;
        if n == 0 {
            return self.error("objects are numbered from 1");
        }
        Ok(n)
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
        if digits.is_empty() {
            return self.error("expected a number");
        }
        let n = digits.parse().or_else(|_| self.error("number out of range"))?;
        self.pos += digits.len();
        Ok(n)
    }

    fn attribute(&mut self) -> Option<Attribute> {
        Attribute::ALL.into_iter().find(|a| self.eat(a.phrase()))
    }

    fn qualifier(&mut self) -> Result<Qualifier, ParseError> {
        let start = self.pos;
        let Some(attribute) = self.attribute() else {
            return self.unknown_word();
        };
        if !self.eat(": ") {
            self.pos = start;
            return self.error("expected an attribute phrase such as \"location: top left\"");
        }
        let value = self.value(attribute)?;
        Ok(Qualifier { attribute, value })
    }

    fn value(&mut self, attribute: Attribute) -> Result<Value, ParseError> {
        match attribute {
            Attribute::Location => match self.location() {
                Some(l) => Ok(Value::Location(l)),
                None => self.unknown_word(),
            },
            Attribute::ViewAngle => Ok(Value::ViewAngle(self.number()?)),
            Attribute::Category => match self.category() {
                Some(c) => Ok(Value::Category(c)),
                None => self.unknown_word(),
            },
            Attribute::Identity => {
                let Some(category) = self.category() else {
                    return self.unknown_word();
                };
                self.expect(" ")?;
                let index = self.number()?;
                Ok(Value::Identity(IdentityValue { category, index }))
            }
        }
    }

    fn location(&mut self) -> Option<Location> {
        Location::ALL.into_iter().find(|l| self.eat_word(l.name()))
    }

    fn category(&mut self) -> Option<String> {
        let found = self
            .categories
            .iter()
            .find(|c| self.rest().starts_with(c.as_str()) && is_boundary(self.rest()[c.len()..].chars().next()))
            .cloned()?;
        self.pos += found.len();
        Some(found)
    }

    fn unknown_word<T>(&self) -> Result<T, ParseError> {
        let word: String = self
            .rest()
            .chars()
            .take_while(|c| !matches!(c, ' ' | ',' | '?' | ')'))
            .collect();
        self.error(format!("unknown attribute or answer word {word:?}"))
    }

    fn question(&mut self) -> Result<Expr, ParseError> {
        if !self.eat("if ") {
            return self.join();
        }
        let cond = self.join()?;
        self.eat(" ");
        self.expect(",")?;
        self.eat(" ");
        if !self.eat_word("then") {
            return self.error("expected \"then\"");
        }
        self.expect(" ")?;
        let then = self.question()?;
        self.eat(" ");
        if !(self.eat(",") || self.eat("?")) {
            return self.error("expected \", else\"");
        }
        self.eat(" ");
        if !self.eat_word("else") {
            return self.error("expected \"else\"");
        }
        self.expect(" ")?;
        let otherwise = self.question()?;
        Ok(Expr::If {
            cond: Box::new(cond),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        })
    }

    fn join(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(" and ") {
                JoinOp::And
            } else if self.eat(" or ") {
                JoinOp::Or
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Join {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        if self.eat("(") {
            let inner = self.join()?;
            self.expect(")")?;
            return Ok(Expr::Group(Box::new(inner)));
        }
        if self.eat("object ") {
            let ordinal = self.ordinal()?;
            let mut qualifiers = Vec::new();
            while self.eat(" with ") {
                qualifiers.push(self.qualifier()?);
            }
            if qualifiers.is_empty() {
                return self.error("expected \" with\" after the object number");
            }
            self.expect(" exists")?;
            return Ok(Expr::Exists { ordinal, qualifiers });
        }
        let lhs = self.operand()?;
        let negated = if self.eat(" not equals ") || self.eat(" not equal ") {
            true
        } else if self.eat(" equals ") {
            false
        } else {
            return Ok(lhs);
        };
        let rhs = self.operand()?;
        Ok(Expr::Compare {
            negated,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    fn operand(&mut self) -> Result<Expr, ParseError> {
        for attribute in Attribute::ALL {
            if self.eat(&format!("{} of object ", attribute.phrase())) {
                let ordinal = self.ordinal()?;
                return Ok(Expr::Get { attribute, ordinal });
            }
        }
        if self.eat("location: ") {
            return match self.location() {
                Some(l) => Ok(Expr::Literal(Value::Location(l))),
                None => self.unknown_word(),
            };
        }
        if self.eat("view angle: ") {
            return Ok(Expr::Literal(Value::ViewAngle(self.number()?)));
        }
        if let Some(l) = self.location() {
            return Ok(Expr::Literal(Value::Location(l)));
        }
        for (word, b) in [("true", true), ("false", false)] {
            if self.eat_word(word) {
                return Ok(Expr::Literal(Value::Bool(b)));
            }
        }
        match self.category() {
            Some(c) => Ok(Expr::Literal(Value::Category(c))),
            None => self.unknown_word(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CTXDM: &str = "if category of object 1 equals category of object 3, then category of \
        object 2 equals category of object 3, else category of object 2 equals category of object 4?";

    #[test]
    fn ctxdm_parses_to_a_conditional() {
        let ast = parse_instruction(CTXDM).unwrap();
        let Some(Expr::If { cond, then, otherwise }) = &ast.segments[0].question else {
            panic!("not a conditional: {ast:?}");
        };
        for e in [cond, then, otherwise] {
            assert!(matches!(**e, Expr::Compare { negated: false, .. }));
        }
        assert_eq!(ast.to_string(), CTXDM);
    }

    #[test]
    fn minimal_sentence() {
        let ast = parse_instruction("observe object 1, category of object 1?").unwrap();
        assert_eq!(ast.segments.len(), 1);
        assert_eq!(ast.segments[0].items.len(), 1);
        assert_eq!(
            ast.segments[0].question,
            Some(Expr::Get {
                attribute: Attribute::Category,
                ordinal: 1
            })
        );
    }

    #[test]
    fn loose_forms_are_accepted() {
        let text = "observe object 1, observe 2, location of object 1 not equal bottom left ?";
        let ast = parse_instruction(text).unwrap();
        assert_eq!(
            ast.to_string(),
            "observe object 1, observe object 2, location of object 1 not equals location: bottom left?"
        );
        let text = "observe object 1, observe object 2, if location of object 1 equals location of \
            object 2 , then location of object 1? else category of object 2?";
        assert!(parse_instruction(text).is_ok());
    }

    #[test]
    fn queued_segments_and_qualifiers() {
        let text = "observe object 1, observe object 2, category of object 2 not equals category \
            of object 1? observe object 3,observe object 4 with location: top left, category of \
            object 4 equals couches or identity of object 3 equals identity of object 1?";
        let ast = parse_instruction(text).unwrap();
        assert_eq!(ast.segments.len(), 2);
        assert_eq!(
            ast.segments[1].items[1],
            Item::Observe {
                ordinal: 4,
                qualifier: Some(Qualifier {
                    attribute: Attribute::Location,
                    value: Value::Location(Location::TopLeft)
                })
            }
        );
    }

    #[test]
    fn unknown_words_are_reported() {
        let err = parse_instruction("observe object 1, category of object 1 equals desks?").unwrap_err();
        assert!(err.message.contains("desks"), "{err}");
        assert_eq!(err.position, 46);
    }

    #[test]
    fn left_associative_joins() {
        let ast = parse_instruction(
            "category of object 1 equals cars and category of object 2 equals cars or \
             category of object 3 equals cars?",
        )
        .unwrap();
        let Some(Expr::Join { op, lhs, .. }) = &ast.segments[0].question else {
            panic!()
        };
        assert_eq!(*op, JoinOp::Or);
        assert!(matches!(**lhs, Expr::Join { op: JoinOp::And, .. }));
    }

    #[test]
    fn undeclared_objects_are_rejected() {
        assert!(parse_instruction("observe object 1, category of object 2?").is_err());
        assert!(parse_instruction("observe object 2, category of object 2?").is_err());
    }
}
