#pragma once

// JSON input documents. Chains:  {"d", "P", "f", "mu", "label"}.
// Kernel tables:                  {"m", "kernel", "f"} (optional "mu").

#include <string>
#include <variant>

#include "mkedge/chain_core.hpp"
#include "mkedge/kernel_table.hpp"

namespace mkedge {

using InputDocument = std::variant<ChainSpec, KernelTable>;

/// Parses one document. Chains are validated and their observable centered
/// (with a note) when |pi . f| > 1e-12; kernel tables are checked for shape
/// only. Throws ParseError naming the line/column or field at fault, and the
/// chain_core validation errors.
InputDocument parse_document(const std::string& text, Notes* notes = nullptr);

/// Reads and parses a file.
InputDocument parse_spec(const std::string& path, Notes* notes = nullptr);

/// parse_document on the result reproduces every field exactly.
std::string write_spec(const ChainSpec& spec);
std::string write_kernel(const KernelTable& kt);

}  // namespace mkedge
