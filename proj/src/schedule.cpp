#include "metricproto/schedule.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace metricproto {

namespace {

struct Parser {
    const std::string& src;
    const std::map<std::string, double>& vars;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("schedule '" + src + "': " + what + " at position " +
                                    std::to_string(pos));
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    double expr() {
        double v = term();
        for (;;) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }

    double term() {
        double v = unary();
        for (;;) {
            if (eat('*')) v *= unary();
            else if (eat('/')) v /= unary();
            else return v;
        }
    }

    double unary() {
        if (eat('-')) return -unary();
        return primary();
    }

    double primary() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of expression");
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        const char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            const double v = std::stod(src.substr(pos), &used);
            pos += used;
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos;
            while (end < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[end])) || src[end] == '_'))
                ++end;
            const std::string ident = src.substr(pos, end - pos);
            pos = end;
            skip_ws();
            if (pos < src.size() && src[pos] == '(') {
                ++pos;
                std::vector<double> args{expr()};
                while (eat(',')) args.push_back(expr());
                if (!eat(')')) fail("expected ')'");
                return call(ident, args);
            }
            const auto it = vars.find(ident);
            if (it == vars.end()) fail("unknown variable '" + ident + "'");
            return it->second;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    double call(const std::string& name, const std::vector<double>& args) {
        auto arity = [&](std::size_t n) {
            if (args.size() != n) fail("function '" + name + "' expects " + std::to_string(n) + " argument(s)");
        };
        if (name == "floor") { arity(1); return std::floor(args[0]); }
        if (name == "ceil") { arity(1); return std::ceil(args[0]); }
        if (name == "sqrt") { arity(1); return std::sqrt(args[0]); }
        if (name == "log") { arity(1); return std::log(args[0]); }
        if (name == "log2") { arity(1); return std::log2(args[0]); }
        if (name == "pow") { arity(2); return std::pow(args[0], args[1]); }
        if (name == "min") { arity(2); return std::min(args[0], args[1]); }
        if (name == "max") { arity(2); return std::max(args[0], args[1]); }
        fail("unknown function '" + name + "'");
    }
};

} // namespace

double eval_schedule(const std::string& expr, const std::map<std::string, double>& vars) {
    Parser p{expr, vars};
    const double v = p.expr();
    p.skip_ws();
    if (p.pos != expr.size()) p.fail("trailing input");
    return v;
}

long eval_schedule_int(const std::string& expr, const std::map<std::string, double>& vars, long lo,
                       long hi) {
    const double v = eval_schedule(expr, vars);
    const double rounded = std::round(v);
    if (!std::isfinite(v) || std::abs(v - rounded) > 1e-9 * std::max(1.0, std::abs(v)))
        throw std::invalid_argument("schedule '" + expr + "' does not evaluate to an integer (got " +
                                    std::to_string(v) + ")");
    if (rounded < static_cast<double>(lo) || rounded > static_cast<double>(hi))
        throw std::invalid_argument("schedule '" + expr + "' evaluates to " + std::to_string(rounded) +
                                    ", outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<long>(rounded);
}

} // namespace metricproto
