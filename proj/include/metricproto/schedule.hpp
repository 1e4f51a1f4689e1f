#pragma once

#include <map>
#include <string>

namespace metricproto {

/// Evaluates an arithmetic schedule expression over named variables.
/// Supported: numbers, variables, + - * /, unary minus, parentheses, and the
/// functions floor, ceil, sqrt, log, log2, pow, min, max.
/// Example: "floor(pow(n,2/3))".
double eval_schedule(const std::string& expr, const std::map<std::string, double>& vars);

/// Evaluates and validates that the result is an integer in [lo, hi];
/// throws std::invalid_argument otherwise.
long eval_schedule_int(const std::string& expr, const std::map<std::string, double>& vars, long lo,
                       long hi);

} // namespace metricproto
