use super::lexer::Cursor;
use super::structure::{Structure, StructureBuilder};
use crate::error::{Error, Result};

/// Attaches the position of the statement to semantic errors that carry none.
fn at(cur: &(usize, usize), e: Error) -> Error {
    match e {
        Error::Syntax { .. } => e,
        Error::SortMismatch(m) => {
            Error::SortMismatch(format!("{m} (line {}, column {})", cur.0, cur.1))
        }
        other => other,
    }
}

fn name_list(c: &mut Cursor, close: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    if c.eat_sym(close) {
        return Ok(out);
    }
    loop {
        out.push(c.ident()?);
        if c.eat_sym(close) {
            return Ok(out);
        }
        c.expect_sym(",")?;
    }
}

fn tuple(c: &mut Cursor) -> Result<Vec<String>> {
    if c.eat_sym("(") {
        name_list(c, ")")
    } else {
        Ok(vec![c.ident()?])
    }
}

fn signature(c: &mut Cursor) -> Result<Vec<String>> {
    let mut sig = vec![c.ident()?];
    while c.eat_sym(",") {
        sig.push(c.ident()?);
    }
    Ok(sig)
}

pub(crate) fn parse_structure(text: &str) -> Result<Structure> {
    let mut c = Cursor::new(text)?;
    c.expect_word("structure")?;
    let name = c.ident()?;
    let mut b = StructureBuilder::new(&name);
    while !c.at_end() {
        let pos = c.position();
        let keyword = c.ident()?;
        match keyword.as_str() {
            "sort" => {
                let s = c.ident()?;
                c.expect_sym("=")?;
                c.expect_sym("{")?;
                let elements = name_list(&mut c, "}")?;
                b.sort(&s, elements.iter().map(String::as_str))
                    .map_err(|e| at(&pos, e))?;
            }
            "rel" => {
                let r = c.ident()?;
                c.expect_sym("/")?;
                let arity_pos = c.position();
                let arity: usize = c.ident()?.parse().map_err(|_| Error::Syntax {
                    line: arity_pos.0,
                    column: arity_pos.1,
                    message: "expected a numeric arity".into(),
                })?;
                c.expect_sym(":")?;
                let sig = signature(&mut c)?;
                if sig.len() != arity {
                    return Err(Error::SortMismatch(format!(
                        "relation `{r}` declares arity {arity} but a signature of {} sorts (line {}, column {})",
                        sig.len(),
                        pos.0,
                        pos.1
                    )));
                }
                c.expect_sym("=")?;
                c.expect_sym("{")?;
                let mut tuples = Vec::new();
                if !c.eat_sym("}") {
                    loop {
                        tuples.push(tuple(&mut c)?);
                        if c.eat_sym("}") {
                            break;
                        }
                        c.expect_sym(",")?;
                    }
                }
                b.relation(&r, &sig, &tuples).map_err(|e| at(&pos, e))?;
            }
            "fun" => {
                let f = c.ident()?;
                c.expect_sym(":")?;
                let mut sig = signature(&mut c)?;
                c.expect_sym("->")?;
                sig.push(c.ident()?);
                c.expect_sym("=")?;
                c.expect_sym("{")?;
                let mut rows = Vec::new();
                if !c.eat_sym("}") {
                    loop {
                        let mut row = tuple(&mut c)?;
                        c.expect_sym("->")?;
                        row.push(c.ident()?);
                        rows.push(row);
                        if c.eat_sym("}") {
                            break;
                        }
                        c.expect_sym(",")?;
                    }
                }
                b.function_by_names(&f, &sig, &rows)
                    .map_err(|e| at(&pos, e))?;
            }
            "const" => {
                let k = c.ident()?;
                c.expect_sym(":")?;
                let s = c.ident()?;
                c.expect_sym("=")?;
                let e = c.ident()?;
                b.constant(&k, &s, &e).map_err(|e| at(&pos, e))?;
            }
            other => {
                return Err(Error::Syntax {
                    line: pos.0,
                    column: pos.1,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const C3: &str =
        "structure C3\nsort V = { 0, 1, 2 }\nrel E/2 : V,V = { (0,1), (1,2), (2,0) }\n";

    #[test]
    fn parses_three_cycle() {
        let m = parse_structure(C3).unwrap();
        assert_eq!(m.name(), "C3");
        assert_eq!(m.sorts().len(), 1);
        assert_eq!(m.relations().len(), 1);
        assert_eq!(m.relations()[0].tuples.len(), 3);
    }

    #[test]
    fn unknown_element_is_reported() {
        let text = "structure X\nsort V = { 0, 1 }\nrel E/2 : V,V = { (0,5) }\n";
        assert_eq!(
            parse_structure(text).unwrap_err(),
            Error::UnknownElement("5".into())
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let text = "structure X\nsort V = { 0, 1 \nrel E/2 : V,V = { (0,1) }\n";
        match parse_structure(text).unwrap_err() {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (3, 1)),
            e => panic!("unexpected {e:?}"),
        }
        match parse_structure("structure X\nsort V = { a ; b }\n").unwrap_err() {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (2, 14)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_empty_sorts() {
        assert!(matches!(
            parse_structure("structure X\nsort V = { a, a }\n"),
            Err(Error::DuplicateIdentifier(_))
        ));
        assert!(matches!(
            parse_structure("structure X\nsort V = { a }\nsort W = { a }\n"),
            Err(Error::DuplicateIdentifier(_))
        ));
        assert!(matches!(
            parse_structure("structure X\nsort V = { }\n"),
            Err(Error::EmptySort(_))
        ));
    }

    #[test]
    fn sort_signature_mismatch() {
        let text = "structure X\nsort V = { a }\nsort W = { b }\nrel R/2 : V,V = { (a,b) }\n";
        assert!(matches!(parse_structure(text), Err(Error::SortMismatch(_))));
        let text = "structure X\nsort V = { a }\nrel R/3 : V,V = { (a,a) }\n";
        assert!(matches!(parse_structure(text), Err(Error::SortMismatch(_))));
    }

    #[test]
    fn functions_and_constants() {
        let text = "structure F\nsort V = { a, b }\nfun f : V -> V = { a -> b, (b) -> a }\nconst c : V = a\n";
        let m = parse_structure(text).unwrap();
        assert_eq!(m.apply_function("f", &[0]).unwrap(), 1);
        assert_eq!(m.constant("c").unwrap().element, 0);
        let partial = "structure F\nsort V = { a, b }\nfun f : V -> V = { a -> b }\n";
        assert!(matches!(
            parse_structure(partial),
            Err(Error::NotAFunction { .. })
        ));
        let multi = "structure F\nsort V = { a, b }\nfun f : V -> V = { a -> b, a -> a, b -> a }\n";
        assert!(matches!(
            parse_structure(multi),
            Err(Error::NotAFunction { .. })
        ));
        let bad_const = "structure F\nsort V = { a }\nconst c : V = z\n";
        assert!(matches!(
            parse_structure(bad_const),
            Err(Error::UnknownElement(_))
        ));
    }

    #[test]
    fn serialization_round_trips() {
        let text = "structure F\nsort V = { a, b }\nsort W = { w }\nrel R/2 : V,W = { (b,w) }\nfun f : V,V -> V = { (a,a) -> a, (a,b) -> b, (b,a) -> b, (b,b) -> a }\nconst c : V = b\n";
        let m = parse_structure(text).unwrap();
        let again = parse_structure(&m.to_text()).unwrap();
        assert_eq!(m, again);
        assert_eq!(m.to_text(), again.to_text());
    }
}
