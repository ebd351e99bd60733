#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>

#include "autogmap/matrix.hpp"
#include "autogmap/scheme.hpp"

namespace autogmap {

/// Spy-style SVG: one dot per nonzero and one outlined rectangle per block
/// (blue diagonal, orange fill and mirror). Output bytes depend only on the
/// inputs.
inline std::string render_svg(const SparseMatrix& m, const MappingScheme& s, double canvas = 800.0) {
  const double cell = canvas / static_cast<double>(m.dim());
  const double dot = std::max(0.5, cell * 0.4);
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n", canvas,
                canvas, canvas, canvas);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << buf;
  out << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  out << "<g id=\"nonzeros\" fill=\"black\">\n";
  for (const auto& e : m.entries()) {
    std::snprintf(buf, sizeof(buf), "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\"/>\n", (static_cast<double>(e.col) + 0.5) * cell,
                  (static_cast<double>(e.row) + 0.5) * cell, dot);
    out << buf;
  }
  out << "</g>\n<g id=\"blocks\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (const auto& b : s.blocks()) {
    const char* color = b.kind == BlockKind::diagonal ? "#1f77b4" : "#ff7f0e";
    std::snprintf(buf, sizeof(buf), "<rect class=\"%s\" x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" stroke=\"%s\"/>\n",
                  to_string(b.kind), static_cast<double>(b.rect.col0) * cell, static_cast<double>(b.rect.row0) * cell,
                  static_cast<double>(b.rect.width) * cell, static_cast<double>(b.rect.height) * cell, color);
    out << buf;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace autogmap
