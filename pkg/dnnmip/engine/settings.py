"""Settings handling.

Provides :class:`SettingsManager`, which holds every tunable default and can
merge overrides from a JSON file.

"""

import os
import json
import logging

from .util import JSONEncoder

log = logging.getLogger(__name__)


class SettingsManager (object):
    """An object for handling settings.

SettingsManager(settings, filter_caps=False)

:arg settings,filter_caps: as taken by :meth:`add`.

To access and change settings, use attributes of this object.  To restore a
setting to its default (initial) value, delete it.  To add a new setting, just
set it to a value (or use :meth:`add`).  Note that a setting may not begin with
'_'.

"""

    def __init__ (self, settings, filter_caps=False):
        self._settings = {}
        self._defaults = {}
        self._fn = None
        self.add(settings, filter_caps)

    def add (self, settings, filter_caps=False):
        """Add more settings.

:arg settings: a dict used to store the settings, or a (new-style) class with
               settings as attributes.
:arg filter_caps: if ``True``, ignore all settings whose names are not entirely
                  upper-case.

Settings added this way become the defaults restored by deleting them.

"""
        if isinstance(settings, type):
            settings = dict((k, v) for k, v in vars(settings).items()
                                   if not k.startswith('_'))
        for k, v in settings.items():
            if not filter_caps or k.isupper():
                if k.startswith('_'):
                    raise ValueError('invalid setting name: \'{0}\''.format(k))
                self._defaults[k] = v
                setattr(self, k, v)

    def __getattr__ (self, k):
        try:
            return self._settings[k]
        except KeyError:
            raise AttributeError('no such setting: \'{0}\''.format(k))

    def __setattr__ (self, k, v):
        # set if private
        if k[0] == '_':
            object.__setattr__(self, k, v)
        else:
            self._settings[k] = v

    def __delattr__ (self, k):
        setattr(self, k, self._defaults[k])

    def __contains__ (self, k):
        return k in self._settings

    def reset (self):
        """Restore every setting to its default value."""
        self._settings = dict(self._defaults)

    def load (self, fn):
        """Override settings with those stored in a JSON file.

load(fn) -> changed

:arg fn: filename containing a JSON object of ``{setting: value}``.

:return: a sorted list of the names of the settings that were loaded.

Only existing settings may be overridden; others are skipped with a warning.
Raises ``IOError`` if the file can't be read and ``ValueError`` if it isn't a
JSON object.

"""
        with open(fn) as f:
            try:
                new_settings = json.load(f)
            except ValueError:
                raise ValueError('invalid JSON: \'{0}\''.format(fn))
        if not isinstance(new_settings, dict):
            raise ValueError('expected a JSON object: \'{0}\''.format(fn))
        changed = []
        for k, v in sorted(new_settings.items()):
            if k in self._settings:
                setattr(self, k, v)
                changed.append(k)
            else:
                log.warning('unknown setting in \'%s\': \'%s\'', fn, k)
        self._fn = fn
        return changed

    def dump (self, fn=None, names=None):
        """Save settings to disk.

dump([fn][, names])

:arg fn: filename to write to; defaults to the file last passed to
         :meth:`load`.
:arg names: the names of the settings to save; defaults to all of them.

"""
        if fn is None:
            fn = self._fn
        if fn is None:
            raise ValueError('no settings file to save to')
        if names is None:
            names = sorted(self._settings)
        d = os.path.dirname(fn)
        if d and not os.path.isdir(d):
            os.makedirs(d)
        log.info('saving settings to \'%s\'', fn)
        with open(fn, 'w') as f:
            json.dump(dict((k, self._settings[k]) for k in names), f,
                      indent = 4, sort_keys = True, cls = JSONEncoder)
