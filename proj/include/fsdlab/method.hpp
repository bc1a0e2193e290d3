#pragma once

#include <string>

#include "fsdlab/error.hpp"

namespace fsdlab {

enum class Method { PS, PS_SEQ, PS_SYN, PS_SYN_SEQ, FS, SH, DS };

/// Sampling method plus its parameter(s). p_p is the packet-level rate
/// (unused by FS), p_f the flow/SYN-level rate (used by FS and DS only).
struct MethodSpec {
    Method method = Method::FS;
    double p_p = 1.0;
    double p_f = 1.0;

    static MethodSpec ps(double pp) { return validated({Method::PS, pp, 1.0}); }
    static MethodSpec ps_seq(double pp) { return validated({Method::PS_SEQ, pp, 1.0}); }
    static MethodSpec ps_syn(double pp) { return validated({Method::PS_SYN, pp, 1.0}); }
    static MethodSpec ps_syn_seq(double pp) { return validated({Method::PS_SYN_SEQ, pp, 1.0}); }
    static MethodSpec fs(double pf) { return validated({Method::FS, 1.0, pf}); }
    static MethodSpec sh(double pp) { return validated({Method::SH, pp, 1.0}); }
    static MethodSpec ds(double pf, double pp) { return validated({Method::DS, pp, pf}); }

    /// True for methods whose top row is constant (b0 = q*1): PS+SYN,
    /// PS+SYN+SEQ, FS and DS. These are the methods with unbiased flow pickup.
    bool syn_based() const {
        return method == Method::PS_SYN || method == Method::PS_SYN_SEQ || method == Method::FS ||
               method == Method::DS;
    }

    /// Flow survival probability p with b0 = (1-p)*1; only valid for syn_based().
    double survival_rate() const {
        switch (method) {
            case Method::PS_SYN:
            case Method::PS_SYN_SEQ: return p_p;
            case Method::FS:
            case Method::DS: return p_f;
            default: throw UnsupportedMethod("survival rate undefined for " + name());
        }
    }

    bool uses_pf() const { return method == Method::FS || method == Method::DS; }
    bool uses_pp() const { return method != Method::FS; }

    std::string name() const { return method_name(method); }

    static std::string method_name(Method m);
    static Method parse_method(const std::string& name);

private:
    static MethodSpec validated(MethodSpec s) {
        auto check = [](double p, const char* which) {
            if (!(p > 0.0) || p > 1.0) throw OutOfRange(std::string(which) + " must lie in (0,1]");
        };
        if (s.uses_pp()) check(s.p_p, "p_p");
        if (s.uses_pf()) check(s.p_f, "p_f");
        return s;
    }
};

inline std::string MethodSpec::method_name(Method m) {
    switch (m) {
        case Method::PS: return "ps";
        case Method::PS_SEQ: return "psseq";
        case Method::PS_SYN: return "pssyn";
        case Method::PS_SYN_SEQ: return "pssynseq";
        case Method::FS: return "fs";
        case Method::SH: return "sh";
        case Method::DS: return "ds";
    }
    return "?";
}

inline Method MethodSpec::parse_method(const std::string& name) {
    if (name == "ps") return Method::PS;
    if (name == "psseq" || name == "ps+seq") return Method::PS_SEQ;
    if (name == "pssyn" || name == "ps+syn") return Method::PS_SYN;
    if (name == "pssynseq" || name == "ps+syn+seq") return Method::PS_SYN_SEQ;
    if (name == "fs") return Method::FS;
    if (name == "sh") return Method::SH;
    if (name == "ds") return Method::DS;
    throw UnsupportedMethod("unknown method '" + name + "'");
}

}  // namespace fsdlab
