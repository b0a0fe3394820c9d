from setuptools import setup, find_packages

setup(
    name='gasmix',
    version='0.1.0',
    packages=find_packages(exclude=['examples', 'examples.*']),
    package_data={'data': ['scenarios/*.yaml']},
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'networkx',
        'pyyaml',
        'pytest',
    ],
    python_requires='>=3.8',
    description='Transient simulation of natural gas and hydrogen mixtures in pipeline networks.',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
    ],
    entry_points={
        'console_scripts': [
            'gasmix=gasmix.cli.app:main',
        ],
    },
)
