#pragma once

#include <string>

namespace codesift {
namespace pysyntax {

/// Result of a syntax check, with a diagnostic for the first error.
struct ParseResult {
    bool ok = false;
    std::string error;  // empty when ok
    int line = 0;       // 1-based line of the first error, 0 when ok
};

/// Check whether `source` is a syntactically valid Python module.
///
/// Self-contained tokenizer (INDENT/DEDENT with the tab-to-multiple-of-8
/// rule, implicit joining inside brackets, explicit backslash joining,
/// string prefixes r/b/u/f and their combinations, triple quotes) plus a
/// recursive-descent acceptor for the Python 3 statement and expression
/// grammar.
///
/// Acceptance is calibrated to AST construction, not full compilation:
/// placement checks that CPython performs after parsing (return/yield
/// outside a function, break/continue outside a loop, await outside async,
/// module-level nonlocal) do not reject, matching `ast.parse`. Mixed
/// bytes/str implicit concatenation is rejected, as in CPython.
///
/// Deliberate scope limits, each erring toward leniency so the validity
/// signal only flags clearly broken files: f-string interiors are opaque
/// (brace expressions unchecked); match/case statements, except* groups and
/// PEP 695 type-parameter syntax are not supported; async for/with are
/// accepted outside async def; parameter default ordering and except-clause
/// ordering are not enforced; bytes >= 0x80 are identifier characters
/// (Unicode identifiers pass, category checks skipped). Assignment-target
/// validity is enforced structurally ("1 = 2", "f() = x" are rejected).
ParseResult check(const std::string& source);

/// Convenience acceptor: check(source).ok.
bool parses(const std::string& source);

}  // namespace pysyntax
}  // namespace codesift
