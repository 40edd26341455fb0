#include "latinlex/tei.h"

#include <expat.h>

#include <memory>
#include <set>

#include "latinlex/error.h"

namespace latinlex {
namespace {

const std::set<std::string, std::less<>> kBreaking = {
    "ab",    "argument", "body", "cb",   "cell",  "closer", "dateline", "div",  "div1",
    "div2",  "div3",     "head", "item", "l",     "label",  "lb",       "lg",   "list",
    "note",  "opener",   "p",    "pb",   "quote", "row",    "salute",   "sp",   "speaker",
    "table", "trailer",
};

struct State {
  int body_depth = 0;  // > 0 while inside <body>
  std::string out;
};

std::string_view LocalName(const XML_Char* name) {
  std::string_view n(name);
  // The parser is namespace-aware with '|' as separator: "uri|local".
  auto bar = n.rfind('|');
  return bar == std::string_view::npos ? n : n.substr(bar + 1);
}

void Separate(State* s) {
  if (!s->out.empty() && s->out.back() != ' ') s->out.push_back(' ');
}

void XMLCALL OnStart(void* data, const XML_Char* name, const XML_Char**) {
  auto* s = static_cast<State*>(data);
  std::string_view local = LocalName(name);
  if (s->body_depth > 0) {
    ++s->body_depth;
    if (kBreaking.count(local)) Separate(s);
  } else if (local == "body") {
    s->body_depth = 1;
  }
}

void XMLCALL OnEnd(void* data, const XML_Char* name) {
  auto* s = static_cast<State*>(data);
  if (s->body_depth == 0) return;
  if (kBreaking.count(LocalName(name))) Separate(s);
  --s->body_depth;
}

void XMLCALL OnText(void* data, const XML_Char* text, int len) {
  auto* s = static_cast<State*>(data);
  if (s->body_depth > 0) s->out.append(text, static_cast<size_t>(len));
}

}  // namespace

std::string ExtractTeiBodyText(std::string_view xml) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreateNS("UTF-8", '|'), &XML_ParserFree);
  if (!parser) throw Error(ErrorCode::kInternal, "cannot create XML parser");
  State state;
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), OnStart, OnEnd);
  XML_SetCharacterDataHandler(parser.get(), OnText);
  if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    std::string location = std::to_string(XML_GetCurrentLineNumber(parser.get())) + ":" +
                           std::to_string(XML_GetCurrentColumnNumber(parser.get()));
    throw Error(ErrorCode::kParse,
                std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                location);
  }
  // Trim the separators added at the body edges.
  std::string& out = state.out;
  size_t b = out.find_first_not_of(' ');
  if (b == std::string::npos) return {};
  size_t e = out.find_last_not_of(' ');
  return out.substr(b, e - b + 1);
}

}  // namespace latinlex
