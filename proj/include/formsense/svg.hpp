#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace formsense::svg {

std::string num(double v, int decimals = 2);
std::string escape(std::string_view text);

struct Color {
  int r = 0, g = 0, b = 0;
};
std::string hex(Color c);
/// Perceptually ordered palette (dark blue -> teal -> yellow), t clamped to [0, 1].
Color palette(double t);

/// Maps a data rectangle onto a pixel frame, y pointing up.
struct Frame {
  double left = 70, top = 30, width = 420, height = 420;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

  double x(double v) const { return left + (v - x_lo) / (x_hi - x_lo) * width; }
  double y(double v) const { return top + height - (v - y_lo) / (y_hi - y_lo) * height; }
};

/// Tick values at a 1/2/5 step covering [lo, hi].
std::vector<double> ticks(double lo, double hi, int target = 6);

class Document {
 public:
  Document(double width, double height, std::string_view title);

  void raw(std::string_view element);
  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = "");
  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0,
            std::string_view extra = "");
  void circle(double cx, double cy, double r, std::string_view fill, std::string_view extra = "");
  void text(double x, double y, std::string_view content, double size = 12, std::string_view anchor = "start",
            std::string_view extra = "");
  void polyline(const std::vector<std::array<double, 2>>& pixels, std::string_view stroke, double width = 1.0,
                std::string_view extra = "");
  /// Frame border, ticks and axis labels.
  void axes(const Frame& f, std::string_view x_label, std::string_view y_label);
  void arrow(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 2.0);

  std::string str() const;

 private:
  double width_, height_;
  std::string body_;
};

}  // namespace formsense::svg
