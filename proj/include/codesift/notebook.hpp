#pragma once

#include <optional>
#include <string>
#include <vector>

namespace codesift {

/// One (markdown, code, execution-result) unit of a converted notebook.
///
/// Missing slots are empty strings so the triplet arity stays fixed.
struct NotebookTriplet {
    std::string markdown;
    std::string code;
    std::string output;

    bool operator==(const NotebookTriplet&) const = default;
};

/// Parse notebook JSON into triplets in cell order.
///
/// A triplet is a maximal run of consecutive markdown cells (joined by blank
/// lines) followed by at most one code cell and that cell's textual outputs.
/// Raw cells are ignored. Returns std::nullopt when the input is not a
/// parseable notebook (missing or malformed "cells" array or cell fields).
std::optional<std::vector<NotebookTriplet>> convert_jupyter(const std::string& notebook_json);

/// Render triplets into one document body.
///
/// Each triplet becomes <markdown>/<code>/<output> tagged sections; empty
/// slots are omitted. The rendering is deterministic and injective for the
/// tag-free cell texts produced by convert_jupyter.
std::string render_triplets(const std::vector<NotebookTriplet>& triplets);

}  // namespace codesift
