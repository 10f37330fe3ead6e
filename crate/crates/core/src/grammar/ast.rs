//! AST node representation.
//!
//! Interior nodes carry child slots interleaved with keyword runs; a slot
//! holds `None` when a grammar-optional child is absent, which keeps operand
//! positions stable across parses of the same production. Data-carrying
//! leaves hold the source lexeme and, after annotation, a [`DataType`].

use super::DataType;

/// Grammar production tags. Statement and clause kinds come from the parser;
/// `Unknown` is produced only by IR translation for arity-reduction nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    // statements
    CreateTableStmt,
    CreateViewStmt,
    CreateIndexStmt,
    CreateVirtualTableStmt,
    CreateTriggerStmt,
    InsertStmt,
    SelectStmt,
    CompoundSelect,
    UpdateStmt,
    DeleteStmt,
    DropStmt,
    PragmaStmt,
    // select machinery
    WithClause,
    CommonTableExpr,
    CteHead,
    SelectClause,
    DistinctSpec,
    SelectList,
    SelectItem,
    StarItem,
    FromClause,
    SubqueryTable,
    TableJoin,
    JoinRhs,
    OnConstraint,
    UsingConstraint,
    WhereClause,
    GroupByClause,
    HavingClause,
    OrderByClause,
    OrderingTerm,
    LimitClause,
    SelectTail,
    // create/insert/update machinery
    ColumnDefList,
    ColumnDef,
    ColumnConstraints,
    TypeSize,
    RefTarget,
    TableConstraint,
    IndexedColumnList,
    ViewTarget,
    OnTarget,
    TriggerTail,
    TriggerBody,
    InsertTarget,
    ColumnNameList,
    ValuesClause,
    ValueRow,
    DefaultValues,
    UpsertClause,
    SetClause,
    Assignment,
    PragmaValue,
    // expressions
    Expr,
    BinaryExpr,
    UnaryExpr,
    ParenExpr,
    ColumnRef,
    FunctionCall,
    FunctionArgs,
    InExpr,
    InList,
    SubqueryExpr,
    ExistsExpr,
    BetweenExpr,
    CaseExpr,
    WhenClause,
    CastExpr,
    IsNullExpr,
    NullLiteral,
    // data leaves
    Table,
    Column,
    Index,
    View,
    Trigger,
    FunctionName,
    IntLiteral,
    FloatLiteral,
    StringLiteral,
    // IR-only arity-reduction marker
    Unknown,
}

impl NodeKind {
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::CreateTableStmt
                | NodeKind::CreateViewStmt
                | NodeKind::CreateIndexStmt
                | NodeKind::CreateVirtualTableStmt
                | NodeKind::CreateTriggerStmt
                | NodeKind::InsertStmt
                | NodeKind::SelectStmt
                | NodeKind::CompoundSelect
                | NodeKind::UpdateStmt
                | NodeKind::DeleteStmt
                | NodeKind::DropStmt
                | NodeKind::PragmaStmt
        )
    }

    pub fn is_data_leaf(self) -> bool {
        matches!(
            self,
            NodeKind::Table
                | NodeKind::Column
                | NodeKind::Index
                | NodeKind::View
                | NodeKind::Trigger
                | NodeKind::FunctionName
                | NodeKind::IntLiteral
                | NodeKind::FloatLiteral
                | NodeKind::StringLiteral
        )
    }

    pub fn name(self) -> &'static str {
        nodekind_name(self)
    }
}

fn nodekind_name(kind: NodeKind) -> &'static str {
    macro_rules! names {
        ($($v:ident),+ $(,)?) => {
            match kind { $(NodeKind::$v => stringify!($v)),+ }
        };
    }
    names!(
        CreateTableStmt, CreateViewStmt, CreateIndexStmt, CreateVirtualTableStmt,
        CreateTriggerStmt, InsertStmt, SelectStmt, CompoundSelect, UpdateStmt, DeleteStmt,
        DropStmt, PragmaStmt, WithClause, CommonTableExpr, CteHead, SelectClause, DistinctSpec,
        SelectList, SelectItem, StarItem, FromClause, SubqueryTable, TableJoin, JoinRhs,
        OnConstraint, UsingConstraint, WhereClause, GroupByClause, HavingClause, OrderByClause,
        OrderingTerm, LimitClause, SelectTail, ColumnDefList, ColumnDef, ColumnConstraints,
        TypeSize, RefTarget, TableConstraint, IndexedColumnList, ViewTarget, OnTarget,
        TriggerTail, TriggerBody, InsertTarget, ColumnNameList, ValuesClause, ValueRow,
        DefaultValues, UpsertClause, SetClause, Assignment, PragmaValue, Expr, BinaryExpr,
        UnaryExpr, ParenExpr, ColumnRef, FunctionCall, FunctionArgs, InExpr, InList,
        SubqueryExpr, ExistsExpr, BetweenExpr, CaseExpr, WhenClause, CastExpr, IsNullExpr,
        NullLiteral, Table, Column, Index, View, Trigger, FunctionName, IntLiteral,
        FloatLiteral, StringLiteral, Unknown,
    )
}

/// One grammar node. See the module docs for the slot/keyword layout; the
/// invariant `keywords.len() == slots.len() + 1` holds for interior nodes,
/// and concatenating keyword runs with child renderings in order reproduces
/// the source token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct AstNode {
    pub kind: NodeKind,
    pub slots: Vec<Option<AstNode>>,
    /// `keywords[i]` renders before `slots[i]`; the last run renders after
    /// the final slot. Lexemes keep their original case.
    pub keywords: Vec<Vec<String>>,
    /// When set, the last slot maps to the IR right operand and the
    /// remaining children fold into the left operand.
    pub tail: bool,
    /// Source lexeme, data leaves only.
    pub token_text: Option<String>,
    /// Refined semantic type, filled in by [`super::annotate`].
    pub data_type: Option<DataType>,
}

impl AstNode {
    pub fn leaf(kind: NodeKind, text: impl Into<String>) -> AstNode {
        debug_assert!(kind.is_data_leaf());
        AstNode {
            kind,
            slots: Vec::new(),
            keywords: vec![Vec::new()],
            tail: false,
            token_text: Some(text.into()),
            data_type: None,
        }
    }

    pub fn build(kind: NodeKind) -> NodeBuilder {
        NodeBuilder {
            node: AstNode {
                kind,
                slots: Vec::new(),
                keywords: vec![Vec::new()],
                tail: false,
                token_text: None,
                data_type: None,
            },
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.token_text.is_some()
    }

    /// Flatten the node back to its source token sequence.
    pub fn render_tokens(&self, out: &mut Vec<String>) {
        if let Some(text) = &self.token_text {
            out.push(text.clone());
            return;
        }
        for (i, run) in self.keywords.iter().enumerate() {
            out.extend(run.iter().cloned());
            if let Some(Some(child)) = self.slots.get(i) {
                child.render_tokens(out);
            }
        }
    }

    /// Iterate over present children.
    pub fn children(&self) -> impl Iterator<Item = &AstNode> {
        self.slots.iter().filter_map(|s| s.as_ref())
    }
}

/// An ordered list of statement ASTs; one entry per SQL statement.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub statements: Vec<AstNode>,
}

impl Program {
    /// Source token sequence of the whole program, `;`-separated.
    pub fn render_tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        for stmt in &self.statements {
            stmt.render_tokens(&mut out);
            out.push(";".to_string());
        }
        out
    }
}

/// Incremental construction of an interior node in source order.
pub struct NodeBuilder {
    node: AstNode,
}

impl NodeBuilder {
    /// Append a keyword/operator lexeme to the current run.
    pub fn kw(&mut self, text: impl Into<String>) -> &mut Self {
        self.node
            .keywords
            .last_mut()
            .expect("builder always has a trailing run")
            .push(text.into());
        self
    }

    /// Append a present child slot.
    pub fn child(&mut self, child: AstNode) -> &mut Self {
        self.node.slots.push(Some(child));
        self.node.keywords.push(Vec::new());
        self
    }

    /// Append a declared-but-absent optional slot.
    pub fn empty_slot(&mut self) -> &mut Self {
        self.node.slots.push(None);
        self.node.keywords.push(Vec::new());
        self
    }

    pub fn opt_child(&mut self, child: Option<AstNode>) -> &mut Self {
        match child {
            Some(c) => self.child(c),
            None => self.empty_slot(),
        }
    }

    /// Mark the last slot as the designated tail (IR right operand).
    pub fn tail(&mut self) -> &mut Self {
        self.node.tail = true;
        self
    }

    pub fn finish(&mut self) -> AstNode {
        debug_assert_eq!(self.node.keywords.len(), self.node.slots.len() + 1);
        let kind = self.node.kind;
        std::mem::replace(
            &mut self.node,
            AstNode {
                kind,
                slots: Vec::new(),
                keywords: vec![Vec::new()],
                tail: false,
                token_text: None,
                data_type: None,
            },
        )
    }
}
