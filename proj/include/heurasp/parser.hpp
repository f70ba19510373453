#ifndef HEURASP_PARSER_HPP
#define HEURASP_PARSER_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "heurasp/ast.hpp"

namespace heurasp::parser {

struct SourceProgram {
    std::vector<ast::Rule> rules;
    std::vector<ast::HeuristicDirective> directives;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column)),
          line(line), column(column) {}
    int line;
    int column;
};

// Parses a program text. Statements are terminated by '.', '%' starts a line
// comment. Interval facts like x(1..2). are expanded here.
SourceProgram parse_program(const std::string& text);

// Canonical text form; parse_program(pretty_print(p)) is structurally equal
// to p modulo interval expansion.
std::string pretty_print(const SourceProgram& p);

} // namespace heurasp::parser

#endif
