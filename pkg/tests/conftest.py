import string

from hypothesis import strategies as st

from spokenre import Manifest, RelationInstance, Triplet

# Entity/relation surfaces for round-trip properties: canonical spacing,
# free of the reserved marker substrings ('<' excluded outright; partial
# markers get dedicated tests).
_FIELD_ALPHABET = string.ascii_letters + string.digits + ".,'-" + "éßÜπñ"

field_word = st.text(alphabet=_FIELD_ALPHABET, min_size=1, max_size=8)
surface = st.lists(field_word, min_size=1, max_size=4).map(" ".join)
triplets = st.builds(Triplet, surface, surface, surface)
triplet_lists = st.lists(triplets, max_size=5)

transcripts = st.lists(field_word, min_size=1, max_size=12).map(" ".join)

_RELATION_POOL = ("org:founded_by", "per:title", "per:origin", "loc:contains", "no_relation")


@st.composite
def manifests(draw, max_instances=6):
    relations = tuple(_RELATION_POOL)
    n = draw(st.integers(min_value=0, max_value=max_instances))
    instances = []
    for i in range(n):
        split = draw(st.sampled_from(("train", "dev", "test")))
        source = draw(st.sampled_from(("gold", "tts", "human", "pseudo")))
        if source == "pseudo" and draw(st.booleans()):
            inst_triplets = ()
        else:
            inst_triplets = tuple(
                Triplet(draw(surface), draw(st.sampled_from(relations)), draw(surface))
                for _ in range(draw(st.integers(min_value=1, max_value=3)))
            )
        instances.append(
            RelationInstance(
                id=f"utt-{i}",
                split=split,
                transcript=draw(transcripts),
                triplets=inst_triplets,
                audio_ref=draw(st.none() | st.just(f"audio/utt-{i}.wav")),
                voice=draw(st.none() | st.sampled_from(("v1", "v2"))),
                duration=draw(st.none() | st.floats(min_value=0.1, max_value=30.0, allow_nan=False)),
                source=source,
            )
        )
    meta = draw(st.dictionaries(st.sampled_from(("lineage", "note", "seed")), field_word, max_size=2))
    return Manifest(name=draw(field_word), relations=relations, instances=tuple(instances), meta=meta)
