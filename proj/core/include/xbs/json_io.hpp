#pragma once
#include <json.hpp>

#include "xbs/conditions.hpp"
#include "xbs/sampler.hpp"

namespace xbs {

using nlohmann::json;

json to_json(const Forest &f);
Forest forest_from_json(const json &j);

json to_json(const Series &s);
Series series_from_json(const json &j);

json to_json(const Scheme &s);
Scheme scheme_from_json(const json &j);

json to_json(const PolySpec &p);
PolySpec polyspec_from_json(const json &j);

MCSpec mcspec_from_json(const json &j);

json to_json(const Equation &e);
json to_json(const ConditionSet &cs);
json to_json(const OrderReport &r);
json to_json(const SlopeReport &r);

json residual_report(const Series &s); // list of {forest, coeff, rendered}

} // namespace xbs
