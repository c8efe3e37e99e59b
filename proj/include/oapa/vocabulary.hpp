#pragma once

// Names the engine looks up in the loaded ontology. They live in the seed
// modules under data/ontology; changing a relation means editing the ontology
// and this table together.

#include <string_view>

namespace oapa::vocab {

// Concepts
inline constexpr std::string_view Activite = "Activite";
inline constexpr std::string_view ActivitePhysique = "ActivitePhysique";
inline constexpr std::string_view Personne = "Personne";

// Activity relations
inline constexpr std::string_view aValeurMET = "aValeurMET";
inline constexpr std::string_view aIntensite = "aIntensite";
inline constexpr std::string_view aRythme = "aRythme";
inline constexpr std::string_view aEffort = "aEffort";
inline constexpr std::string_view aPourGainPhysique = "aPourGainPhysique";
inline constexpr std::string_view seDerouleA = "seDerouleA";
inline constexpr std::string_view necessiteMateriel = "necessiteMateriel";
inline constexpr std::string_view aNiveauAutonomieRequis = "aNiveauAutonomieRequis";
inline constexpr std::string_view aRPEObserve = "aRPEObserve";
inline constexpr std::string_view contreIndiquePour = "contreIndiquePour";
inline constexpr std::string_view beneficiquePour = "beneficiquePour";
inline constexpr std::string_view estFreinePar = "estFreinePar";

// Person relations
inline constexpr std::string_view aPathologie = "aPathologie";
inline constexpr std::string_view aSymptome = "aSymptome";
inline constexpr std::string_view aPourObjectif = "aPourObjectif";
inline constexpr std::string_view aFrein = "aFrein";
inline constexpr std::string_view aCaracteristiqueSociale = "aCaracteristiqueSociale";
inline constexpr std::string_view aAccesA = "aAccesA";
inline constexpr std::string_view aNiveauActivite = "aNiveauActivite";
inline constexpr std::string_view aNiveauAutonomie = "aNiveauAutonomie";

// Module that holds person individuals built from profiles.
inline constexpr std::string_view ProfileModule = "Profils";

}  // namespace oapa::vocab
