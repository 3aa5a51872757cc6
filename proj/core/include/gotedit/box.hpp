#pragma once

namespace gotedit {

// Axis-aligned box in (x = column, y = row) coordinates; cell (h, w) is
// centred at x = w, y = h.
struct BoxLTRB {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (left + right); }
  double center_y() const { return 0.5 * (top + bottom); }
  bool valid() const { return right > left && bottom > top; }

  friend bool operator==(const BoxLTRB&, const BoxLTRB&) = default;
};

}  // namespace gotedit
