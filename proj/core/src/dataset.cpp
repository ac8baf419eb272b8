#include "dlcf/dataset.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dlcf/errors.hpp"

namespace dlcf {

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::kPositive: return "positive";
    case Polarity::kNegative: return "negative";
    case Polarity::kNeutral: return "neutral";
    case Polarity::kConflict: return "conflict";
  }
  return "neutral";
}

std::optional<Polarity> parse_polarity(std::string_view text) {
  if (text == "positive") return Polarity::kPositive;
  if (text == "negative") return Polarity::kNegative;
  if (text == "neutral") return Polarity::kNeutral;
  if (text == "conflict") return Polarity::kConflict;
  return std::nullopt;
}

std::string_view to_string(DatasetFormat f) {
  return f == DatasetFormat::kSemeval ? "semeval" : "twitter";
}

DatasetFormat parse_dataset_format(std::string_view text) {
  if (text == "semeval") return DatasetFormat::kSemeval;
  if (text == "twitter") return DatasetFormat::kTwitter;
  throw ConfigError("dataset format must be 'semeval' or 'twitter', got '" + std::string(text) + "'");
}

namespace {

std::string utf8_substr(std::string_view s, std::size_t from, std::size_t to) {
  const std::size_t b = utf8_byte_offset(s, from);
  const std::size_t e = utf8_byte_offset(s, to);
  return std::string(s.substr(b, e - b));
}

std::size_t parse_offset(const std::string& value, const std::string& what,
                         const std::string& sentence_id) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ParseError("sentence " + sentence_id + ": attribute " + what + "='" + value +
                         "' is not a non-negative integer",
                     0);
  }
  return out;
}

void check_term(const RawAnnotation& r) {
  const std::size_t len = utf8_length(r.sentence);
  if (r.char_from > r.char_to || r.char_to > len ||
      utf8_substr(r.sentence, r.char_from, r.char_to) != r.term) {
    throw IntegrityError("sentence " + r.sentence_id + ": offsets [" +
                         std::to_string(r.char_from) + ", " + std::to_string(r.char_to) +
                         ") do not select the term '" + r.term + "'");
  }
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<RawAnnotation> parse_semeval(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed SemEval XML: " + e.message(), e.line());
  }
  const auto root = tree.get_child_optional("sentences");
  if (!root) throw ParseError("SemEval XML has no <sentences> root element", 0);

  std::vector<RawAnnotation> out;
  std::size_t index = 0;
  for (const auto& [tag, sentence] : *root) {
    if (tag != "sentence") continue;
    const std::string id =
        sentence.get<std::string>("<xmlattr>.id", "#" + std::to_string(index));
    ++index;
    const auto text = sentence.get_optional<std::string>("text");
    if (!text) throw ParseError("sentence " + id + " has no <text> element", 0);
    const auto terms = sentence.get_child_optional("aspectTerms");
    if (!terms) continue;
    for (const auto& [term_tag, term] : *terms) {
      if (term_tag != "aspectTerm") continue;
      const auto attr = term.get_child_optional("<xmlattr>");
      if (!attr) throw ParseError("sentence " + id + ": aspectTerm without attributes", 0);
      auto need = [&](const char* name) {
        const auto v = attr->get_optional<std::string>(name);
        if (!v) throw ParseError("sentence " + id + ": aspectTerm missing '" + name + "'", 0);
        return *v;
      };
      RawAnnotation r;
      r.sentence_id = id;
      r.sentence = *text;
      r.term = need("term");
      const std::string polarity = need("polarity");
      const auto p = parse_polarity(polarity);
      if (!p) throw ParseError("sentence " + id + ": unknown polarity '" + polarity + "'", 0);
      r.polarity = *p;
      r.char_from = parse_offset(need("from"), "from", id);
      r.char_to = parse_offset(need("to"), "to", id);
      check_term(r);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string serialize_semeval(std::span<const RawAnnotation> records) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<sentences>\n";
  std::size_t i = 0;
  while (i < records.size()) {
    const auto& head = records[i];
    os << "  <sentence id=\"" << xml_escape(head.sentence_id) << "\">\n"
       << "    <text>" << xml_escape(head.sentence) << "</text>\n"
       << "    <aspectTerms>\n";
    std::size_t j = i;
    for (; j < records.size() && records[j].sentence_id == head.sentence_id &&
           records[j].sentence == head.sentence;
         ++j) {
      const auto& r = records[j];
      os << "      <aspectTerm term=\"" << xml_escape(r.term) << "\" polarity=\""
         << to_string(r.polarity) << "\" from=\"" << r.char_from << "\" to=\"" << r.char_to
         << "\"/>\n";
    }
    os << "    </aspectTerms>\n  </sentence>\n";
    i = j;
  }
  os << "</sentences>\n";
  return os.str();
}

std::vector<RawAnnotation> parse_twitter(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string_view rest = text;
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.emplace_back(line);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
  }
  if (lines.size() % 3 != 0) {
    throw FormatError("twitter data has " + std::to_string(lines.size()) +
                      " lines, not a multiple of 3 (record " + std::to_string(lines.size() / 3) +
                      " is incomplete)");
  }
  static constexpr std::string_view kPlaceholder = "$T$";
  std::vector<RawAnnotation> out;
  out.reserve(lines.size() / 3);
  for (std::size_t r = 0; r < lines.size() / 3; ++r) {
    const std::string& raw = lines[3 * r];
    const std::string& target = lines[3 * r + 1];
    std::string label = lines[3 * r + 2];
    label.erase(0, label.find_first_not_of(" \t"));
    label.erase(label.find_last_not_of(" \t") + 1);
    const auto at = raw.find(kPlaceholder);
    if (at == std::string::npos) {
      throw FormatError("twitter record " + std::to_string(r) + ": sentence has no $T$ placeholder");
    }
    RawAnnotation a;
    a.sentence_id = "twitter-" + std::to_string(r);
    if (label == "-1") a.polarity = Polarity::kNegative;
    else if (label == "0") a.polarity = Polarity::kNeutral;
    else if (label == "1") a.polarity = Polarity::kPositive;
    else throw FormatError("twitter record " + std::to_string(r) + ": bad label '" + label + "'");
    a.term = target;
    std::string sentence;
    std::size_t pos = 0;
    for (auto hit = at; hit != std::string::npos; hit = raw.find(kPlaceholder, pos)) {
      sentence.append(raw, pos, hit - pos);
      sentence += target;
      pos = hit + kPlaceholder.size();
    }
    sentence.append(raw, pos);
    a.char_from = utf8_length(std::string_view(raw).substr(0, at));
    a.char_to = a.char_from + utf8_length(target);
    a.sentence = std::move(sentence);
    out.push_back(std::move(a));
  }
  return out;
}

std::string serialize_twitter(std::span<const RawAnnotation> records) {
  std::string out;
  for (const auto& r : records) {
    const std::size_t b = utf8_byte_offset(r.sentence, r.char_from);
    const std::size_t e = utf8_byte_offset(r.sentence, r.char_to);
    out += r.sentence.substr(0, b);
    out += "$T$";
    out += r.sentence.substr(e);
    out += '\n';
    out += r.term;
    out += '\n';
    switch (r.polarity) {
      case Polarity::kNegative: out += "-1"; break;
      case Polarity::kNeutral: out += "0"; break;
      case Polarity::kPositive: out += "1"; break;
      case Polarity::kConflict:
        throw FormatError("twitter format cannot represent a conflict label");
    }
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<RawAnnotation> load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  const std::string text = read_text_file(path);
  return format == DatasetFormat::kSemeval ? parse_semeval(text) : parse_twitter(text);
}

LabelCounts& LabelCounts::operator+=(const LabelCounts& o) {
  positive += o.positive;
  negative += o.negative;
  neutral += o.neutral;
  conflict_dropped += o.conflict_dropped;
  return *this;
}

LabelCounts dataset_stats(std::span<const RawAnnotation> records) {
  LabelCounts c;
  for (const auto& r : records) {
    switch (r.polarity) {
      case Polarity::kPositive: ++c.positive; break;
      case Polarity::kNegative: ++c.negative; break;
      case Polarity::kNeutral: ++c.neutral; break;
      case Polarity::kConflict: ++c.conflict_dropped; break;
    }
  }
  return c;
}

TokenizedAnnotation tokenize_annotation(const RawAnnotation& record) {
  TokenizedAnnotation t;
  t.tokens = tokenize(record.sentence);
  const std::size_t b = utf8_byte_offset(record.sentence, record.char_from);
  const std::size_t e = utf8_byte_offset(record.sentence, record.char_to);
  try {
    t.span = char_span_to_token_span(t.tokens, b, e);
  } catch (const AlignmentError& err) {
    throw AlignmentError("sentence " + record.sentence_id + ": " + err.what());
  }
  t.span.char_from = record.char_from;
  t.span.char_to = record.char_to;
  t.polarity = record.polarity;
  return t;
}

std::vector<TokenizedAnnotation> tokenize_dataset(std::span<const RawAnnotation> records) {
  std::vector<TokenizedAnnotation> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.polarity == Polarity::kConflict) continue;
    out.push_back(tokenize_annotation(r));
  }
  return out;
}

}  // namespace dlcf
