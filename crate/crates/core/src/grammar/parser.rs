//! Recursive-descent parser for the supported SQLite-dialect subset.
//!
//! There is no error recovery: the first syntax error aborts the parse,
//! which is all the mutation validity filter needs. Empty input parses to
//! an empty program.

use super::ast::{AstNode, NodeKind, Program};
use super::lexer::{tokenize, Token, TokenKind};
use super::SyntaxError;

/// Keywords accepted as a column type name in definitions.
const TYPE_KEYWORDS: &[&str] = &[
    "INT", "INTEGER", "TEXT", "CHAR", "VARCHAR", "REAL", "DOUBLE", "FLOAT", "BLOB", "NUMERIC",
    "DECIMAL", "BOOLEAN", "DATE", "DATETIME",
];

/// Parse semicolon-separated statements into a [`Program`].
pub fn parse(input: &str) -> Result<Program, SyntaxError> {
    let tokens = tokenize(input)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end_offset: input.len(),
    };
    let mut statements = Vec::new();
    loop {
        while p.eat_sym(";").is_some() {}
        if p.peek().is_none() {
            break;
        }
        statements.push(p.statement()?);
        if p.peek().is_some() && !p.at_sym(";") {
            return Err(p.err_here("';' or end of input"));
        }
    }
    Ok(Program { statements })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end_offset: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.pos + n)
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_kw(kw))
    }

    fn at_sym(&self, sym: &str) -> bool {
        self.peek().is_some_and(|t| t.is_sym(sym))
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn eat_kw(&mut self, kw: &str) -> Option<String> {
        if self.at_kw(kw) {
            Some(self.bump().text)
        } else {
            None
        }
    }

    fn eat_sym(&mut self, sym: &str) -> Option<String> {
        if self.at_sym(sym) {
            Some(self.bump().text)
        } else {
            None
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<String, SyntaxError> {
        self.eat_kw(kw).ok_or_else(|| self.err_here(kw))
    }

    fn expect_sym(&mut self, sym: &str) -> Result<String, SyntaxError> {
        self.eat_sym(sym).ok_or_else(|| self.err_here(sym))
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => Ok(self.bump().text),
            _ => Err(self.err_here(what)),
        }
    }

    fn ident_leaf(&mut self, kind: NodeKind, what: &str) -> Result<AstNode, SyntaxError> {
        let text = self.expect_ident(what)?;
        Ok(AstNode::leaf(kind, text))
    }

    fn err_here(&self, expected: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => {
                SyntaxError::new(t.offset, format!("expected {expected}, found {:?}", t.text))
            }
            None => SyntaxError::new(self.end_offset, format!("expected {expected}")),
        }
    }

    // ------------------------------------------------------------------
    // statements
    // ------------------------------------------------------------------

    fn statement(&mut self) -> Result<AstNode, SyntaxError> {
        match self.peek() {
            Some(t) if t.is_kw("CREATE") => self.create_statement(),
            Some(t) if t.is_kw("INSERT") || t.is_kw("REPLACE") => self.insert_statement(),
            Some(t) if t.is_kw("SELECT") || t.is_kw("WITH") => self.select_statement(),
            Some(t) if t.is_kw("UPDATE") => self.update_statement(),
            Some(t) if t.is_kw("DELETE") => self.delete_statement(),
            Some(t) if t.is_kw("DROP") => self.drop_statement(),
            Some(t) if t.is_kw("PRAGMA") => self.pragma_statement(),
            _ => Err(self.err_here("a statement keyword")),
        }
    }

    fn create_statement(&mut self) -> Result<AstNode, SyntaxError> {
        let create = self.expect_kw("CREATE")?;
        let temp = self.eat_kw("TEMP").or_else(|| self.eat_kw("TEMPORARY"));
        if self.at_kw("VIRTUAL") {
            return self.create_virtual_table(create);
        }
        if self.at_kw("UNIQUE") || self.at_kw("INDEX") {
            return self.create_index(create);
        }
        if self.at_kw("VIEW") {
            return self.create_view(create, temp);
        }
        if self.at_kw("TRIGGER") {
            return self.create_trigger(create, temp);
        }
        if self.at_kw("TABLE") {
            return self.create_table(create, temp);
        }
        Err(self.err_here("TABLE, VIEW, INDEX, TRIGGER or VIRTUAL"))
    }

    fn if_not_exists(&mut self, b: &mut crate::grammar::ast::NodeBuilder) {
        if self.at_kw("IF") {
            b.kw(self.bump().text);
            if let Some(t) = self.eat_kw("NOT") {
                b.kw(t);
            }
            if let Some(t) = self.eat_kw("EXISTS") {
                b.kw(t);
            }
        }
    }

    fn create_table(&mut self, create: String, temp: Option<String>) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::CreateTableStmt);
        b.kw(create);
        if let Some(t) = temp {
            b.kw(t);
        }
        b.kw(self.expect_kw("TABLE")?);
        self.if_not_exists(&mut b);
        b.child(self.ident_leaf(NodeKind::Table, "table name")?);
        if let Some(as_kw) = self.eat_kw("AS") {
            b.kw(as_kw);
            b.child(self.select_statement()?);
        } else {
            b.kw(self.expect_sym("(")?);
            b.child(self.column_def_list()?);
            b.kw(self.expect_sym(")")?);
        }
        Ok(b.finish())
    }

    fn column_def_list(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::ColumnDefList);
        loop {
            if self.at_kw("PRIMARY")
                || self.at_kw("UNIQUE") && self.peek_at(1).is_some_and(|t| t.is_sym("("))
                || self.at_kw("CHECK")
                || self.at_kw("FOREIGN")
            {
                b.child(self.table_constraint()?);
            } else {
                b.child(self.column_def()?);
            }
            match self.eat_sym(",") {
                Some(c) => {
                    b.kw(c);
                }
                None => break,
            }
        }
        Ok(b.finish())
    }

    fn column_def(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::ColumnDef);
        b.child(self.ident_leaf(NodeKind::Column, "column name")?);
        let constraints = self.column_constraints()?;
        b.opt_child(constraints);
        Ok(b.finish())
    }

    /// Type name plus trailing column constraints, or `None` when the next
    /// token ends the definition.
    fn column_constraints(&mut self) -> Result<Option<AstNode>, SyntaxError> {
        let mut b = AstNode::build(NodeKind::ColumnConstraints);
        let mut any = false;
        loop {
            let Some(t) = self.peek() else { break };
            let canon = t.canon.clone();
            if t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&canon.as_str()) {
                any = true;
                b.kw(self.bump().text);
                if self.at_sym("(") {
                    b.child(self.type_size()?);
                }
                continue;
            }
            match canon.as_str() {
                "PRIMARY" => {
                    any = true;
                    b.kw(self.bump().text);
                    b.kw(self.expect_kw("KEY")?);
                    if let Some(t) = self.eat_kw("ASC").or_else(|| self.eat_kw("DESC")) {
                        b.kw(t);
                    }
                    self.conflict_clause(&mut b)?;
                    if let Some(t) = self.eat_kw("AUTOINCREMENT") {
                        b.kw(t);
                    }
                }
                "NOT" => {
                    any = true;
                    b.kw(self.bump().text);
                    b.kw(self.expect_kw("NULL")?);
                    self.conflict_clause(&mut b)?;
                }
                "NULL" => {
                    any = true;
                    b.kw(self.bump().text);
                }
                "UNIQUE" => {
                    any = true;
                    b.kw(self.bump().text);
                    self.conflict_clause(&mut b)?;
                }
                "CHECK" => {
                    any = true;
                    b.kw(self.bump().text);
                    b.kw(self.expect_sym("(")?);
                    b.child(self.wrapped_expr()?);
                    b.kw(self.expect_sym(")")?);
                }
                "DEFAULT" => {
                    any = true;
                    b.kw(self.bump().text);
                    if self.at_sym("(") {
                        b.kw(self.bump().text);
                        b.child(self.wrapped_expr()?);
                        b.kw(self.expect_sym(")")?);
                    } else if self.at_kw("NULL") {
                        b.kw(self.bump().text);
                    } else {
                        b.child(self.signed_literal()?);
                    }
                }
                "COLLATE" => {
                    any = true;
                    b.kw(self.bump().text);
                    // collation names are a fixed vocabulary, kept structural
                    match self.peek() {
                        Some(t) if t.kind == TokenKind::Ident || t.kind == TokenKind::Keyword => {
                            b.kw(self.bump().text);
                        }
                        _ => return Err(self.err_here("collation name")),
                    }
                }
                "AS" => {
                    any = true;
                    b.kw(self.bump().text);
                    b.kw(self.expect_sym("(")?);
                    b.child(self.wrapped_expr()?);
                    b.kw(self.expect_sym(")")?);
                    if let Some(t) = self.eat_kw("VIRTUAL") {
                        b.kw(t);
                    }
                }
                "REFERENCES" => {
                    any = true;
                    b.kw(self.bump().text);
                    b.child(self.ref_target()?);
                }
                _ => break,
            }
        }
        if any {
            Ok(Some(b.finish()))
        } else {
            Ok(None)
        }
    }

    fn conflict_clause(
        &mut self,
        b: &mut crate::grammar::ast::NodeBuilder,
    ) -> Result<(), SyntaxError> {
        if self.at_kw("ON") {
            b.kw(self.bump().text);
            b.kw(self.expect_kw("CONFLICT")?);
            let action = self
                .eat_kw("ABORT")
                .or_else(|| self.eat_kw("FAIL"))
                .or_else(|| self.eat_kw("IGNORE"))
                .or_else(|| self.eat_kw("REPLACE"))
                .or_else(|| self.eat_kw("ROLLBACK"));
            match action {
                Some(t) => b.kw(t),
                None => return Err(self.err_here("a conflict action")),
            };
        }
        Ok(())
    }

    fn type_size(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::TypeSize);
        b.kw(self.expect_sym("(")?);
        b.child(self.literal_leaf()?);
        if let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.literal_leaf()?);
        }
        b.kw(self.expect_sym(")")?);
        Ok(b.finish())
    }

    fn signed_literal(&mut self) -> Result<AstNode, SyntaxError> {
        if self.at_sym("-") || self.at_sym("+") {
            let mut b = AstNode::build(NodeKind::UnaryExpr);
            b.kw(self.bump().text);
            b.child(self.literal_leaf()?);
            return Ok(b.finish());
        }
        self.literal_leaf()
    }

    fn literal_leaf(&mut self) -> Result<AstNode, SyntaxError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Int => Ok(AstNode::leaf(NodeKind::IntLiteral, self.bump().text)),
            Some(t) if t.kind == TokenKind::Float => {
                Ok(AstNode::leaf(NodeKind::FloatLiteral, self.bump().text))
            }
            Some(t) if t.kind == TokenKind::Str => {
                Ok(AstNode::leaf(NodeKind::StringLiteral, self.bump().text))
            }
            _ => Err(self.err_here("a literal")),
        }
    }

    fn ref_target(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::RefTarget);
        b.child(self.ident_leaf(NodeKind::Table, "referenced table")?);
        if self.at_sym("(") {
            b.kw(self.bump().text);
            b.child(self.column_name_list()?);
            b.kw(self.expect_sym(")")?);
        } else {
            b.empty_slot();
        }
        Ok(b.finish())
    }

    fn table_constraint(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::TableConstraint);
        if let Some(t) = self.eat_kw("PRIMARY") {
            b.kw(t);
            b.kw(self.expect_kw("KEY")?);
            b.kw(self.expect_sym("(")?);
            b.child(self.column_name_list()?);
            b.kw(self.expect_sym(")")?);
            self.conflict_clause(&mut b)?;
        } else if let Some(t) = self.eat_kw("UNIQUE") {
            b.kw(t);
            b.kw(self.expect_sym("(")?);
            b.child(self.column_name_list()?);
            b.kw(self.expect_sym(")")?);
            self.conflict_clause(&mut b)?;
        } else if let Some(t) = self.eat_kw("CHECK") {
            b.kw(t);
            b.kw(self.expect_sym("(")?);
            b.child(self.wrapped_expr()?);
            b.kw(self.expect_sym(")")?);
        } else if let Some(t) = self.eat_kw("FOREIGN") {
            b.kw(t);
            b.kw(self.expect_kw("KEY")?);
            b.kw(self.expect_sym("(")?);
            b.child(self.column_name_list()?);
            b.kw(self.expect_sym(")")?);
            b.kw(self.expect_kw("REFERENCES")?);
            b.child(self.ref_target()?);
        } else {
            return Err(self.err_here("a table constraint"));
        }
        Ok(b.finish())
    }

    fn column_name_list(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::ColumnNameList);
        b.child(self.ident_leaf(NodeKind::Column, "column name")?);
        while let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.ident_leaf(NodeKind::Column, "column name")?);
        }
        Ok(b.finish())
    }

    fn create_view(&mut self, create: String, temp: Option<String>) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::CreateViewStmt);
        b.kw(create);
        if let Some(t) = temp {
            b.kw(t);
        }
        b.kw(self.expect_kw("VIEW")?);
        self.if_not_exists(&mut b);
        let mut head = AstNode::build(NodeKind::ViewTarget);
        head.child(self.ident_leaf(NodeKind::View, "view name")?);
        if self.at_sym("(") {
            head.kw(self.bump().text);
            head.child(self.column_name_list()?);
            head.kw(self.expect_sym(")")?);
        } else {
            head.empty_slot();
        }
        b.child(head.finish());
        b.kw(self.expect_kw("AS")?);
        b.child(self.select_statement()?);
        Ok(b.finish())
    }

    fn create_index(&mut self, create: String) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::CreateIndexStmt);
        b.kw(create);
        if let Some(t) = self.eat_kw("UNIQUE") {
            b.kw(t);
        }
        b.kw(self.expect_kw("INDEX")?);
        self.if_not_exists(&mut b);
        b.child(self.ident_leaf(NodeKind::Index, "index name")?);
        b.kw(self.expect_kw("ON")?);
        let mut on = AstNode::build(NodeKind::OnTarget);
        on.child(self.ident_leaf(NodeKind::Table, "table name")?);
        on.kw(self.expect_sym("(")?);
        on.child(self.indexed_column_list()?);
        on.kw(self.expect_sym(")")?);
        b.child(on.finish());
        Ok(b.finish())
    }

    fn indexed_column_list(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::IndexedColumnList);
        loop {
            b.child(self.ident_leaf(NodeKind::Column, "indexed column")?);
            if let Some(t) = self.eat_kw("ASC").or_else(|| self.eat_kw("DESC")) {
                b.kw(t);
            }
            match self.eat_sym(",") {
                Some(c) => {
                    b.kw(c);
                }
                None => break,
            }
        }
        Ok(b.finish())
    }

    fn create_virtual_table(&mut self, create: String) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::CreateVirtualTableStmt);
        b.kw(create);
        b.kw(self.expect_kw("VIRTUAL")?);
        b.kw(self.expect_kw("TABLE")?);
        self.if_not_exists(&mut b);
        b.child(self.ident_leaf(NodeKind::Table, "table name")?);
        b.kw(self.expect_kw("USING")?);
        // module names are a fixed vocabulary, kept structural
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => b.kw(self.bump().text),
            _ => return Err(self.err_here("module name")),
        };
        if self.at_sym("(") {
            b.kw(self.bump().text);
            b.child(self.column_def_list()?);
            b.kw(self.expect_sym(")")?);
        } else {
            b.empty_slot();
        }
        Ok(b.finish())
    }

    fn create_trigger(&mut self, create: String, temp: Option<String>) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::CreateTriggerStmt);
        b.kw(create);
        if let Some(t) = temp {
            b.kw(t);
        }
        b.kw(self.expect_kw("TRIGGER")?);
        self.if_not_exists(&mut b);
        b.child(self.ident_leaf(NodeKind::Trigger, "trigger name")?);
        if let Some(t) = self.eat_kw("BEFORE").or_else(|| self.eat_kw("AFTER")) {
            b.kw(t);
        }
        let event = self
            .eat_kw("INSERT")
            .or_else(|| self.eat_kw("DELETE"))
            .or_else(|| self.eat_kw("UPDATE"));
        match event {
            Some(t) => b.kw(t),
            None => return Err(self.err_here("INSERT, DELETE or UPDATE")),
        };
        b.kw(self.expect_kw("ON")?);
        let mut tail = AstNode::build(NodeKind::TriggerTail);
        tail.child(self.ident_leaf(NodeKind::Table, "table name")?);
        let mut body = AstNode::build(NodeKind::TriggerBody);
        body.kw(self.expect_kw("BEGIN")?);
        loop {
            body.child(self.statement()?);
            body.kw(self.expect_sym(";")?);
            if self.at_kw("END") {
                body.kw(self.bump().text);
                break;
            }
        }
        tail.child(body.finish());
        b.child(tail.finish());
        Ok(b.finish())
    }

    fn insert_statement(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::InsertStmt);
        if let Some(t) = self.eat_kw("REPLACE") {
            b.kw(t);
        } else {
            b.kw(self.expect_kw("INSERT")?);
            if let Some(t) = self.eat_kw("OR") {
                b.kw(t);
                let action = self
                    .eat_kw("REPLACE")
                    .or_else(|| self.eat_kw("IGNORE"))
                    .or_else(|| self.eat_kw("ABORT"))
                    .or_else(|| self.eat_kw("FAIL"))
                    .or_else(|| self.eat_kw("ROLLBACK"));
                match action {
                    Some(t) => b.kw(t),
                    None => return Err(self.err_here("a conflict action")),
                };
            }
        }
        b.kw(self.expect_kw("INTO")?);
        let mut target = AstNode::build(NodeKind::InsertTarget);
        target.child(self.ident_leaf(NodeKind::Table, "table name")?);
        if self.at_sym("(") {
            target.kw(self.bump().text);
            target.child(self.column_name_list()?);
            target.kw(self.expect_sym(")")?);
        } else {
            target.empty_slot();
        }
        b.child(target.finish());
        if self.at_kw("VALUES") {
            b.child(self.values_clause()?);
        } else if self.at_kw("SELECT") || self.at_kw("WITH") {
            b.child(self.select_statement()?);
        } else if self.at_kw("DEFAULT") {
            let mut d = AstNode::build(NodeKind::DefaultValues);
            d.kw(self.bump().text);
            d.kw(self.expect_kw("VALUES")?);
            b.child(d.finish());
        } else {
            return Err(self.err_here("VALUES, SELECT or DEFAULT VALUES"));
        }
        if self.at_kw("ON") {
            let mut u = AstNode::build(NodeKind::UpsertClause);
            u.kw(self.bump().text);
            u.kw(self.expect_kw("CONFLICT")?);
            u.kw(self.expect_kw("DO")?);
            u.kw(self.expect_kw("NOTHING")?);
            b.child(u.finish());
        } else {
            b.empty_slot();
        }
        b.tail();
        Ok(b.finish())
    }

    fn values_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::ValuesClause);
        b.kw(self.expect_kw("VALUES")?);
        b.child(self.value_row()?);
        while let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.value_row()?);
        }
        Ok(b.finish())
    }

    fn value_row(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::ValueRow);
        b.kw(self.expect_sym("(")?);
        if !self.at_sym(")") {
            b.child(self.wrapped_expr()?);
            while let Some(c) = self.eat_sym(",") {
                b.kw(c);
                b.child(self.wrapped_expr()?);
            }
        }
        b.kw(self.expect_sym(")")?);
        Ok(b.finish())
    }

    // ------------------------------------------------------------------
    // SELECT
    // ------------------------------------------------------------------

    /// Full select statement: optional WITH prefix, one or more cores joined
    /// by compound operators, optional ORDER BY / LIMIT tail.
    fn select_statement(&mut self) -> Result<AstNode, SyntaxError> {
        let with = if self.at_kw("WITH") {
            Some(self.with_clause()?)
        } else {
            None
        };
        // A view body may be a bare WITH clause (no trailing core); accept it.
        let core_follows = self.at_kw("SELECT");
        if with.is_some() && !core_follows {
            let mut b = AstNode::build(NodeKind::SelectStmt);
            b.child(with.unwrap());
            b.empty_slot();
            b.tail();
            return Ok(b.finish());
        }

        let first = self.select_core(&with)?;
        let mut cores = vec![first];
        let mut ops: Vec<Vec<String>> = Vec::new();
        loop {
            let mut run = Vec::new();
            if let Some(t) = self.eat_kw("UNION") {
                run.push(t);
                if let Some(t) = self.eat_kw("ALL") {
                    run.push(t);
                }
            } else if let Some(t) = self.eat_kw("EXCEPT") {
                run.push(t);
            } else if let Some(t) = self.eat_kw("INTERSECT") {
                run.push(t);
            } else {
                break;
            }
            ops.push(run);
            cores.push(self.select_core(&None)?);
        }
        let tail = self.select_tail()?;

        if cores.len() == 1 {
            let mut core = cores.pop().unwrap();
            // attach the tail slot to the single core
            core.slots.push(tail);
            core.keywords.push(Vec::new());
            core.tail = true;
            return Ok(core);
        }
        let mut b = AstNode::build(NodeKind::CompoundSelect);
        let mut cores = cores.into_iter();
        b.child(cores.next().unwrap());
        for (core, op) in cores.zip(ops) {
            for t in op {
                b.kw(t);
            }
            b.child(core);
        }
        b.opt_child(tail);
        b.tail();
        Ok(b.finish())
    }

    /// One SELECT core. The optional WITH clause of the enclosing statement
    /// becomes the first child so the whole statement stays one node.
    /// The tail slot is appended by the caller.
    fn select_core(&mut self, with: &Option<AstNode>) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::SelectStmt);
        if let Some(w) = with.clone() {
            b.child(w);
        }
        b.child(self.select_clause()?);
        if self.at_kw("FROM") {
            b.child(self.from_clause()?);
        }
        if self.at_kw("WHERE") {
            b.child(self.where_clause()?);
        }
        if self.at_kw("GROUP") {
            b.child(self.group_by_clause()?);
        }
        Ok(b.finish())
    }

    fn select_tail(&mut self) -> Result<Option<AstNode>, SyntaxError> {
        let order = if self.at_kw("ORDER") {
            Some(self.order_by_clause()?)
        } else {
            None
        };
        let limit = if self.at_kw("LIMIT") {
            Some(self.limit_clause()?)
        } else {
            None
        };
        Ok(match (order, limit) {
            (Some(o), Some(l)) => {
                let mut b = AstNode::build(NodeKind::SelectTail);
                b.child(o);
                b.child(l);
                Some(b.finish())
            }
            (Some(o), None) => Some(o),
            (None, Some(l)) => Some(l),
            (None, None) => None,
        })
    }

    fn with_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::WithClause);
        b.kw(self.expect_kw("WITH")?);
        b.child(self.common_table_expr()?);
        while let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.common_table_expr()?);
        }
        Ok(b.finish())
    }

    fn common_table_expr(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::CommonTableExpr);
        let mut head = AstNode::build(NodeKind::CteHead);
        head.child(self.ident_leaf(NodeKind::Table, "CTE name")?);
        if self.at_sym("(") {
            head.kw(self.bump().text);
            head.child(self.column_name_list()?);
            head.kw(self.expect_sym(")")?);
        } else {
            head.empty_slot();
        }
        b.child(head.finish());
        b.kw(self.expect_kw("AS")?);
        b.child(self.subquery_expr()?);
        Ok(b.finish())
    }

    fn select_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::SelectClause);
        b.kw(self.expect_kw("SELECT")?);
        if self.at_kw("DISTINCT") || self.at_kw("ALL") {
            let mut d = AstNode::build(NodeKind::DistinctSpec);
            d.kw(self.bump().text);
            b.child(d.finish());
        } else {
            b.empty_slot();
        }
        b.child(self.select_list()?);
        Ok(b.finish())
    }

    fn select_list(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::SelectList);
        b.child(self.select_item()?);
        while let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.select_item()?);
        }
        Ok(b.finish())
    }

    fn select_item(&mut self) -> Result<AstNode, SyntaxError> {
        if self.at_sym("*") {
            let mut b = AstNode::build(NodeKind::StarItem);
            b.kw(self.bump().text);
            return Ok(b.finish());
        }
        let expr = self.wrapped_expr()?;
        if let Some(as_kw) = self.eat_kw("AS") {
            let mut b = AstNode::build(NodeKind::SelectItem);
            b.child(expr);
            b.kw(as_kw);
            b.child(self.ident_leaf(NodeKind::Column, "alias")?);
            return Ok(b.finish());
        }
        Ok(expr)
    }

    fn from_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::FromClause);
        b.kw(self.expect_kw("FROM")?);
        b.child(self.table_source()?);
        while let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.table_source()?);
        }
        Ok(b.finish())
    }

    fn table_source(&mut self) -> Result<AstNode, SyntaxError> {
        let mut node = self.primary_source()?;
        loop {
            let mut join_kws: Vec<String> = Vec::new();
            if self.at_kw("NATURAL") {
                join_kws.push(self.bump().text);
            }
            match self.peek() {
                Some(t) if t.is_kw("LEFT") || t.is_kw("INNER") || t.is_kw("CROSS") => {
                    join_kws.push(self.bump().text);
                    if self.at_kw("OUTER") {
                        join_kws.push(self.bump().text);
                    }
                }
                _ => {}
            }
            if self.at_kw("JOIN") {
                join_kws.push(self.bump().text);
            } else {
                if !join_kws.is_empty() {
                    return Err(self.err_here("JOIN"));
                }
                break;
            }
            let mut rhs = AstNode::build(NodeKind::JoinRhs);
            for t in join_kws {
                rhs.kw(t);
            }
            rhs.child(self.primary_source()?);
            if self.at_kw("ON") {
                let mut on = AstNode::build(NodeKind::OnConstraint);
                on.kw(self.bump().text);
                on.child(self.wrapped_expr()?);
                rhs.child(on.finish());
            } else if self.at_kw("USING") {
                let mut using = AstNode::build(NodeKind::UsingConstraint);
                using.kw(self.bump().text);
                using.kw(self.expect_sym("(")?);
                using.child(self.column_name_list()?);
                using.kw(self.expect_sym(")")?);
                rhs.child(using.finish());
            } else {
                rhs.empty_slot();
            }
            let mut join = AstNode::build(NodeKind::TableJoin);
            join.child(node);
            join.child(rhs.finish());
            node = join.finish();
        }
        Ok(node)
    }

    fn primary_source(&mut self) -> Result<AstNode, SyntaxError> {
        if self.at_sym("(") {
            let mut b = AstNode::build(NodeKind::SubqueryTable);
            b.kw(self.bump().text);
            b.child(self.select_statement()?);
            b.kw(self.expect_sym(")")?);
            return Ok(b.finish());
        }
        self.ident_leaf(NodeKind::Table, "table name or subquery")
    }

    fn where_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::WhereClause);
        b.kw(self.expect_kw("WHERE")?);
        b.child(self.wrapped_expr()?);
        Ok(b.finish())
    }

    fn group_by_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::GroupByClause);
        b.kw(self.expect_kw("GROUP")?);
        b.kw(self.expect_kw("BY")?);
        b.child(self.wrapped_expr()?);
        while let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.wrapped_expr()?);
        }
        if self.at_kw("HAVING") {
            let mut h = AstNode::build(NodeKind::HavingClause);
            h.kw(self.bump().text);
            h.child(self.wrapped_expr()?);
            b.child(h.finish());
        }
        Ok(b.finish())
    }

    fn order_by_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::OrderByClause);
        b.kw(self.expect_kw("ORDER")?);
        b.kw(self.expect_kw("BY")?);
        b.child(self.ordering_term()?);
        while let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.ordering_term()?);
        }
        Ok(b.finish())
    }

    fn ordering_term(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::OrderingTerm);
        b.child(self.wrapped_expr()?);
        if let Some(t) = self.eat_kw("ASC").or_else(|| self.eat_kw("DESC")) {
            b.kw(t);
        }
        Ok(b.finish())
    }

    fn limit_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::LimitClause);
        b.kw(self.expect_kw("LIMIT")?);
        b.child(self.wrapped_expr()?);
        if let Some(t) = self.eat_kw("OFFSET") {
            b.kw(t);
            b.child(self.wrapped_expr()?);
        } else if let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.wrapped_expr()?);
        } else {
            b.empty_slot();
        }
        Ok(b.finish())
    }

    // ------------------------------------------------------------------
    // other statements
    // ------------------------------------------------------------------

    fn update_statement(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::UpdateStmt);
        b.kw(self.expect_kw("UPDATE")?);
        if let Some(t) = self.eat_kw("OR") {
            b.kw(t);
            let action = self
                .eat_kw("REPLACE")
                .or_else(|| self.eat_kw("IGNORE"))
                .or_else(|| self.eat_kw("ABORT"))
                .or_else(|| self.eat_kw("FAIL"))
                .or_else(|| self.eat_kw("ROLLBACK"));
            match action {
                Some(t) => b.kw(t),
                None => return Err(self.err_here("a conflict action")),
            };
        }
        b.child(self.ident_leaf(NodeKind::Table, "table name")?);
        b.kw(self.expect_kw("SET")?);
        b.child(self.set_clause()?);
        if self.at_kw("WHERE") {
            b.child(self.where_clause()?);
        }
        Ok(b.finish())
    }

    fn set_clause(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::SetClause);
        b.child(self.assignment()?);
        while let Some(c) = self.eat_sym(",") {
            b.kw(c);
            b.child(self.assignment()?);
        }
        Ok(b.finish())
    }

    fn assignment(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::Assignment);
        b.child(self.ident_leaf(NodeKind::Column, "column name")?);
        b.kw(self.expect_sym("=")?);
        b.child(self.wrapped_expr()?);
        Ok(b.finish())
    }

    fn delete_statement(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::DeleteStmt);
        b.kw(self.expect_kw("DELETE")?);
        b.kw(self.expect_kw("FROM")?);
        b.child(self.ident_leaf(NodeKind::Table, "table name")?);
        if self.at_kw("WHERE") {
            b.child(self.where_clause()?);
        } else {
            b.empty_slot();
        }
        Ok(b.finish())
    }

    fn drop_statement(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::DropStmt);
        b.kw(self.expect_kw("DROP")?);
        let leaf_kind = if self.at_kw("TABLE") {
            NodeKind::Table
        } else if self.at_kw("VIEW") {
            NodeKind::View
        } else if self.at_kw("INDEX") {
            NodeKind::Index
        } else if self.at_kw("TRIGGER") {
            NodeKind::Trigger
        } else {
            return Err(self.err_here("TABLE, VIEW, INDEX or TRIGGER"));
        };
        b.kw(self.bump().text);
        if self.at_kw("IF") {
            b.kw(self.bump().text);
            b.kw(self.expect_kw("EXISTS")?);
        }
        b.child(self.ident_leaf(leaf_kind, "name")?);
        Ok(b.finish())
    }

    fn pragma_statement(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::PragmaStmt);
        b.kw(self.expect_kw("PRAGMA")?);
        b.child(self.ident_leaf(NodeKind::FunctionName, "pragma name")?);
        if let Some(eq) = self.eat_sym("=") {
            b.kw(eq);
            b.child(self.pragma_value()?);
        } else if self.at_sym("(") {
            b.kw(self.bump().text);
            b.child(self.pragma_value()?);
            b.kw(self.expect_sym(")")?);
        } else {
            b.empty_slot();
        }
        Ok(b.finish())
    }

    fn pragma_value(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::PragmaValue);
        match self.peek() {
            Some(t)
                if matches!(
                    t.kind,
                    TokenKind::Int | TokenKind::Float | TokenKind::Str
                ) =>
            {
                b.child(self.literal_leaf()?);
            }
            Some(t) if t.is_sym("-") || t.is_sym("+") => {
                b.child(self.signed_literal()?);
            }
            // ON/OFF/boolean-ish names stay structural
            Some(t) if t.kind == TokenKind::Ident || t.kind == TokenKind::Keyword => {
                b.kw(self.bump().text);
            }
            _ => return Err(self.err_here("a pragma value")),
        }
        Ok(b.finish())
    }

    // ------------------------------------------------------------------
    // expressions
    // ------------------------------------------------------------------

    /// Expression in a clause-entry position, wrapped in an `Expr` node so
    /// that every such position shares one donor type for mutation.
    fn wrapped_expr(&mut self) -> Result<AstNode, SyntaxError> {
        let inner = self.expr_or()?;
        let mut b = AstNode::build(NodeKind::Expr);
        b.child(inner);
        Ok(b.finish())
    }

    fn binary(&mut self, left: AstNode, ops: Vec<String>, right: AstNode) -> AstNode {
        let mut b = AstNode::build(NodeKind::BinaryExpr);
        b.child(left);
        for op in ops {
            b.kw(op);
        }
        b.child(right);
        b.finish()
    }

    fn expr_or(&mut self) -> Result<AstNode, SyntaxError> {
        let mut node = self.expr_and()?;
        while let Some(t) = self.eat_kw("OR") {
            let rhs = self.expr_and()?;
            node = self.binary(node, vec![t], rhs);
        }
        Ok(node)
    }

    fn expr_and(&mut self) -> Result<AstNode, SyntaxError> {
        let mut node = self.expr_not()?;
        while let Some(t) = self.eat_kw("AND") {
            let rhs = self.expr_not()?;
            node = self.binary(node, vec![t], rhs);
        }
        Ok(node)
    }

    fn expr_not(&mut self) -> Result<AstNode, SyntaxError> {
        if self.at_kw("NOT") && !self.peek_at(1).is_some_and(|t| t.is_kw("EXISTS")) {
            let mut b = AstNode::build(NodeKind::UnaryExpr);
            b.kw(self.bump().text);
            b.child(self.expr_not()?);
            return Ok(b.finish());
        }
        self.expr_cmp()
    }

    fn expr_cmp(&mut self) -> Result<AstNode, SyntaxError> {
        let mut node = self.expr_add()?;
        loop {
            // plain comparison operators
            let sym = ["=", "==", "!=", "<>", "<", "<=", ">", ">="]
                .iter()
                .find(|s| self.at_sym(s))
                .copied();
            if let Some(s) = sym {
                let t = self.expect_sym(s)?;
                let rhs = self.expr_add()?;
                node = self.binary(node, vec![t], rhs);
                continue;
            }
            if self.at_kw("ISNULL") || self.at_kw("NOTNULL") {
                let mut b = AstNode::build(NodeKind::IsNullExpr);
                b.child(node);
                b.kw(self.bump().text);
                node = b.finish();
                continue;
            }
            if self.at_kw("IS") {
                let is_kw = self.bump().text;
                let not_kw = self.eat_kw("NOT");
                if self.at_kw("NULL") {
                    let mut b = AstNode::build(NodeKind::IsNullExpr);
                    b.child(node);
                    b.kw(is_kw);
                    if let Some(t) = not_kw {
                        b.kw(t);
                    }
                    b.kw(self.bump().text);
                    node = b.finish();
                } else {
                    let rhs = self.expr_add()?;
                    let mut ops = vec![is_kw];
                    ops.extend(not_kw);
                    node = self.binary(node, ops, rhs);
                }
                continue;
            }
            let not_kw = if self.at_kw("NOT")
                && self
                    .peek_at(1)
                    .is_some_and(|t| t.is_kw("IN") || t.is_kw("LIKE") || t.is_kw("GLOB") || t.is_kw("BETWEEN"))
            {
                Some(self.bump().text)
            } else {
                None
            };
            if self.at_kw("LIKE") || self.at_kw("GLOB") {
                let op = self.bump().text;
                let rhs = self.expr_add()?;
                let mut ops = Vec::new();
                ops.extend(not_kw);
                ops.push(op);
                node = self.binary(node, ops, rhs);
                continue;
            }
            if self.at_kw("BETWEEN") {
                let between = self.bump().text;
                let lo = self.expr_add()?;
                let and = self.expect_kw("AND")?;
                let hi = self.expr_add()?;
                let mut b = AstNode::build(NodeKind::BetweenExpr);
                b.child(node);
                if let Some(t) = not_kw {
                    b.kw(t);
                }
                b.kw(between);
                b.child(lo);
                b.kw(and);
                b.child(hi);
                node = b.finish();
                continue;
            }
            if self.at_kw("IN") {
                let in_kw = self.bump().text;
                let rhs = self.in_rhs()?;
                let mut b = AstNode::build(NodeKind::InExpr);
                b.child(node);
                if let Some(t) = not_kw {
                    b.kw(t);
                }
                b.kw(in_kw);
                b.child(rhs);
                node = b.finish();
                continue;
            }
            if let Some(t) = not_kw {
                // NOT consumed but nothing matched; cannot happen given the
                // lookahead above, keep the parser honest anyway
                return Err(SyntaxError::new(0, format!("dangling {t:?}")));
            }
            break;
        }
        Ok(node)
    }

    fn in_rhs(&mut self) -> Result<AstNode, SyntaxError> {
        if self.at_sym("(") && self.is_subquery_ahead() {
            return self.subquery_expr();
        }
        let mut b = AstNode::build(NodeKind::InList);
        b.kw(self.expect_sym("(")?);
        if !self.at_sym(")") {
            b.child(self.wrapped_expr()?);
            while let Some(c) = self.eat_sym(",") {
                b.kw(c);
                b.child(self.wrapped_expr()?);
            }
        }
        b.kw(self.expect_sym(")")?);
        Ok(b.finish())
    }

    fn is_subquery_ahead(&self) -> bool {
        self.at_sym("(")
            && self
                .peek_at(1)
                .is_some_and(|t| t.is_kw("SELECT") || t.is_kw("WITH"))
    }

    fn expr_add(&mut self) -> Result<AstNode, SyntaxError> {
        let mut node = self.expr_mul()?;
        loop {
            let sym = ["+", "-", "||"].iter().find(|s| self.at_sym(s)).copied();
            match sym {
                Some(s) => {
                    let t = self.expect_sym(s)?;
                    let rhs = self.expr_mul()?;
                    node = self.binary(node, vec![t], rhs);
                }
                None => break,
            }
        }
        Ok(node)
    }

    fn expr_mul(&mut self) -> Result<AstNode, SyntaxError> {
        let mut node = self.expr_unary()?;
        loop {
            let sym = ["*", "/", "%", "<<", ">>", "&", "|"]
                .iter()
                .find(|s| self.at_sym(s))
                .copied();
            match sym {
                Some(s) => {
                    let t = self.expect_sym(s)?;
                    let rhs = self.expr_unary()?;
                    node = self.binary(node, vec![t], rhs);
                }
                None => break,
            }
        }
        Ok(node)
    }

    fn expr_unary(&mut self) -> Result<AstNode, SyntaxError> {
        if self.at_sym("+") || self.at_sym("-") || self.at_sym("~") {
            let mut b = AstNode::build(NodeKind::UnaryExpr);
            b.kw(self.bump().text);
            b.child(self.expr_unary()?);
            return Ok(b.finish());
        }
        self.expr_primary()
    }

    fn expr_primary(&mut self) -> Result<AstNode, SyntaxError> {
        let Some(t) = self.peek() else {
            return Err(self.err_here("an expression"));
        };
        match t.kind {
            TokenKind::Int | TokenKind::Float | TokenKind::Str => self.literal_leaf(),
            TokenKind::Keyword if t.is_kw("NULL") => {
                let mut b = AstNode::build(NodeKind::NullLiteral);
                b.kw(self.bump().text);
                Ok(b.finish())
            }
            TokenKind::Keyword if t.is_kw("CASE") => self.case_expr(),
            TokenKind::Keyword if t.is_kw("CAST") => self.cast_expr(),
            TokenKind::Keyword if t.is_kw("EXISTS") => {
                let mut b = AstNode::build(NodeKind::ExistsExpr);
                b.kw(self.bump().text);
                b.child(self.subquery_expr()?);
                Ok(b.finish())
            }
            TokenKind::Keyword if t.is_kw("NOT") => {
                // NOT EXISTS reaches here via expr_not's lookahead
                let mut b = AstNode::build(NodeKind::ExistsExpr);
                b.kw(self.bump().text);
                b.kw(self.expect_kw("EXISTS")?);
                b.child(self.subquery_expr()?);
                Ok(b.finish())
            }
            TokenKind::Symbol if t.is_sym("(") => {
                if self.is_subquery_ahead() {
                    return self.subquery_expr();
                }
                let mut b = AstNode::build(NodeKind::ParenExpr);
                b.kw(self.bump().text);
                b.child(self.expr_or()?);
                b.kw(self.expect_sym(")")?);
                Ok(b.finish())
            }
            TokenKind::Ident => {
                if self.peek_at(1).is_some_and(|n| n.is_sym("(")) {
                    return self.function_call();
                }
                self.column_ref()
            }
            _ => Err(self.err_here("an expression")),
        }
    }

    fn column_ref(&mut self) -> Result<AstNode, SyntaxError> {
        let first = self.expect_ident("column name")?;
        let mut b = AstNode::build(NodeKind::ColumnRef);
        if self.at_sym(".") {
            b.child(AstNode::leaf(NodeKind::Table, first));
            b.kw(self.bump().text);
            b.child(self.ident_leaf(NodeKind::Column, "column name")?);
        } else {
            b.child(AstNode::leaf(NodeKind::Column, first));
        }
        Ok(b.finish())
    }

    fn function_call(&mut self) -> Result<AstNode, SyntaxError> {
        let name = self.expect_ident("function name")?;
        let mut b = AstNode::build(NodeKind::FunctionCall);
        b.child(AstNode::leaf(NodeKind::FunctionName, name));
        b.kw(self.expect_sym("(")?);
        if self.at_sym(")") {
            b.empty_slot();
        } else if self.at_sym("*") {
            let mut star = AstNode::build(NodeKind::StarItem);
            star.kw(self.bump().text);
            b.child(star.finish());
        } else {
            let mut args = AstNode::build(NodeKind::FunctionArgs);
            if let Some(t) = self.eat_kw("DISTINCT") {
                args.kw(t);
            }
            args.child(self.wrapped_expr()?);
            while let Some(c) = self.eat_sym(",") {
                args.kw(c);
                args.child(self.wrapped_expr()?);
            }
            b.child(args.finish());
        }
        b.kw(self.expect_sym(")")?);
        Ok(b.finish())
    }

    fn case_expr(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::CaseExpr);
        b.kw(self.expect_kw("CASE")?);
        if !self.at_kw("WHEN") {
            b.child(self.wrapped_expr()?);
        }
        while self.at_kw("WHEN") {
            let mut w = AstNode::build(NodeKind::WhenClause);
            w.kw(self.bump().text);
            w.child(self.wrapped_expr()?);
            w.kw(self.expect_kw("THEN")?);
            w.child(self.wrapped_expr()?);
            b.child(w.finish());
        }
        if let Some(t) = self.eat_kw("ELSE") {
            b.kw(t);
            b.child(self.wrapped_expr()?);
        }
        b.kw(self.expect_kw("END")?);
        Ok(b.finish())
    }

    fn cast_expr(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::CastExpr);
        b.kw(self.expect_kw("CAST")?);
        b.kw(self.expect_sym("(")?);
        b.child(self.wrapped_expr()?);
        b.kw(self.expect_kw("AS")?);
        let mut any = false;
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&t.canon.as_str()) {
                b.kw(self.bump().text);
                any = true;
            } else {
                break;
            }
        }
        if !any {
            return Err(self.err_here("a type name"));
        }
        b.kw(self.expect_sym(")")?);
        Ok(b.finish())
    }

    fn subquery_expr(&mut self) -> Result<AstNode, SyntaxError> {
        let mut b = AstNode::build(NodeKind::SubqueryExpr);
        b.kw(self.expect_sym("(")?);
        b.child(self.select_statement()?);
        b.kw(self.expect_sym(")")?);
        Ok(b.finish())
    }
}
