#ifndef LATINLEX_TEI_H_
#define LATINLEX_TEI_H_

#include <string>
#include <string_view>

namespace latinlex {

// Minimal TEI reading: the character data below the <body> element (any
// namespace), with all markup dropped. Block-level elements (p, div, l, ab,
// head, item, ...) and milestones (lb, pb, cb) are separated by a space so
// that words in adjacent blocks do not run together; inline elements are
// transparent. A document without a body yields the empty string.
//
// Throws Error(kParse) with "line:column" as location on malformed XML.
std::string ExtractTeiBodyText(std::string_view xml);

}  // namespace latinlex

#endif  // LATINLEX_TEI_H_
