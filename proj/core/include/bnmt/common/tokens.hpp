#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bnmt {

using Tokens = std::vector<std::string>;

// Splits on ASCII whitespace; runs of whitespace never produce empty tokens.
Tokens tokenize(std::string_view text);

std::string detokenize(const Tokens& tokens);

// True for subword pieces that continue into the next token ("foo@@").
bool is_continuation_token(std::string_view token);

}  // namespace bnmt
