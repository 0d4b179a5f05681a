#include "hbell/types.hpp"

namespace hbell {

std::string to_string(StateFamily family)
{
    switch (family) {
        case StateFamily::Vac1Photon: return "vac1photon";
        case StateFamily::Unbalanced: return "unbalanced";
        case StateFamily::PhotonPair: return "photonpair";
    }
    return "unknown";
}

StateFamily family_from_string(const std::string& name)
{
    if (name == "vac1photon") return StateFamily::Vac1Photon;
    if (name == "unbalanced") return StateFamily::Unbalanced;
    if (name == "photonpair") return StateFamily::PhotonPair;
    throw std::invalid_argument("unknown state family: " + name);
}

}  // namespace hbell
